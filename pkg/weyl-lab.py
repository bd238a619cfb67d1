#!/usr/bin/env python3
#
# Copyright 2024 Linx Software, Inc.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import os
import sys
import time
import logging
import argparse
from weyllab import (
    LOG_DIR
)
from weyllab.errors import (
    ConfigError,
    LabError
)
from weyllab.config_helper import (
    load_lab_config,
    resolve_quadrature_spec,
    resolve_runtime_options,
    resolve_tolerances
)
from weyllab.schema_helper import (
    load_experiment_catalogue,
    load_experiment_config,
    validate_experiment_config
)
from weyllab.experiment_helper import (
    ExperimentContext,
    run_experiment
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_LAB_ERROR = 3


def parse_arguments(argv=None):
    """
    解析命令行参数。

    Args:
        argv (list[str] | None): 参数列表，None 时使用 sys.argv。

    Returns:
        argparse.Namespace: 包含解析后的命令行参数的对象。
    """

    parser = argparse.ArgumentParser(
        description="Weyl 渐近数值实验室：按配置运行命名实验并输出 CSV 与 summary.json。")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="运行实验。")
    run_parser.add_argument("--config", "-c", required=True, help="实验配置 JSON 文件的路径。")
    run_parser.add_argument("--out", "-o", help="输出目录，缺省时使用配置中的 output 或 ./output/<实验名>。")
    run_parser.add_argument("--threads", "-t", type=int, help="线程数，覆盖 runtime.max_workers。")

    subparsers.add_parser("list-experiments", help="列出可用实验。")

    validate_parser = subparsers.add_parser("validate", help="只校验实验配置，不计算。")
    validate_parser.add_argument("--config", "-c", required=True, help="实验配置 JSON 文件的路径。")

    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 1:
        parser.error("--threads 必须是正整数")
    return args


def setup_logging(formatted_utc_time):
    """
    配置日志记录，创建日志文件并设置日志格式和处理器，同时限制日志文件数量，只保留最近的200个。

    Args:
        formatted_utc_time (str): 格式化后的UTC时间字符串，用于生成日志文件名。

    Returns:
        None: 函数不返回任何内容。
    """

    os.makedirs(LOG_DIR, exist_ok=True)

    log_files = [f for f in os.listdir(
        LOG_DIR) if f.startswith('log_') and f.endswith('.log')]

    # 旧文件在前
    log_files.sort(key=lambda x: os.path.getctime(os.path.join(LOG_DIR, x)))

    max_log_files = 200
    if len(log_files) + 1 > max_log_files:
        files_to_delete = len(log_files) + 1 - max_log_files
        for i in range(files_to_delete):
            file_to_delete = os.path.join(LOG_DIR, log_files[i])
            try:
                os.remove(file_to_delete)
                logging.debug(f"删除日志: {file_to_delete}")
            except Exception as e:
                logging.error(f"删除 {file_to_delete} 时失败: {str(e)}")

    log_file = os.path.join(LOG_DIR, f'log_{formatted_utc_time}.log')

    logger = logging.getLogger()
    logger.setLevel(logging.INFO)

    file_handler = logging.FileHandler(log_file, mode='w')
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(logging.Formatter(
        '%(asctime)s [%(levelname)s] [%(name)s:%(funcName)s] %(message)s'))
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(logging.Formatter(
        '%(asctime)s [%(levelname)s] %(message)s'))
    logger.addHandler(console_handler)


def list_experiments(catalogue):
    """按名称顺序输出实验名与说明。"""

    for name in sorted(catalogue):
        print(f"{name}\t{catalogue[name].get('description', '')}")
    return EXIT_OK


def validate_config(config_path, lab_config, catalogue):
    """
    读取并校验实验配置。

    Returns:
        ExperimentConfig: 通过校验的配置。

    Raises:
        ConfigError: 配置无效。
    """

    raw = load_experiment_config(config_path)
    return validate_experiment_config(
        raw, catalogue, lab_config["tolerances"].keys(),
        lab_config["quadrature"]["sphere_order"])


def resolve_output_dir(args, experiment_config):
    """命令行 --out 优先，其次为配置中的 output，最后为 ./output/<实验名>。"""

    if args.out:
        return args.out
    configured = experiment_config.get("output")
    if configured:
        return configured
    return os.path.join(os.getcwd(), "output", experiment_config.experiment)


def run_command(args, lab_config, catalogue):
    """
    执行 run 子命令。

    Returns:
        int: 退出码，全部检查通过为 0，否则为 1。
    """

    experiment_config = validate_config(args.config, lab_config, catalogue)
    threads = args.threads if args.threads is not None else experiment_config.get("threads")
    runtime_options = resolve_runtime_options(lab_config, threads)
    context = ExperimentContext(
        config=experiment_config,
        quad=resolve_quadrature_spec(lab_config),
        tolerances=resolve_tolerances(lab_config, experiment_config.tolerances),
        out_dir=resolve_output_dir(args, experiment_config),
        disable_tqdm=runtime_options["disable_tqdm"],
        max_workers=runtime_options["max_workers"],
        jet_order_cap=runtime_options["jet_order_cap"],
    )
    result = run_experiment(context)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def main(argv=None):
    """
    主函数，负责解析命令行参数、设置日志记录系统并分派子命令。

    Args:
        argv (list[str] | None): 命令行参数。

    Returns:
        int: 退出码。0 表示通过，1 表示检查失败，2 表示配置错误，3 表示计算错误。
    """

    args = parse_arguments(argv)

    utc_time_tuple = time.gmtime(time.time())
    formatted_utc_time = time.strftime("%Y%m%d%H%M%S", utc_time_tuple)
    setup_logging(formatted_utc_time)

    try:
        lab_config = load_lab_config()
        catalogue = load_experiment_catalogue()
    except RuntimeError as e:
        logging.error(f"异常抛出: {e}")
        return EXIT_CONFIG_ERROR

    try:
        if args.command == "list-experiments":
            return list_experiments(catalogue)
        if args.command == "validate":
            experiment_config = validate_config(args.config, lab_config, catalogue)
            logging.info(f"配置有效: 实验 {experiment_config.experiment}")
            return EXIT_OK
        return run_command(args, lab_config, catalogue)
    except ConfigError as e:
        logging.error(f"配置错误: {e}")
        return EXIT_CONFIG_ERROR
    except LabError as e:
        logging.error(f"异常抛出: {e}")
        return EXIT_LAB_ERROR
    except (ValueError, ArithmeticError) as e:
        logging.error(f"计算异常 {type(e).__name__}: {e}")
        logging.debug("异常堆栈", exc_info=True)
        return EXIT_LAB_ERROR


if __name__ == "__main__":
    sys.exit(main())
