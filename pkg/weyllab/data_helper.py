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

import csv
import json
import math
from typing import Any, Dict, Iterable, List, Sequence, Union

import numpy as np


def format_number(value: Any) -> str:
    """
    按 17 位有效数字格式化数值，保证双精度往返精确。

    Args:
        value (Any): 待格式化的值。整数、布尔值和字符串原样输出。

    Returns:
        str: 格式化后的字符串。
    """

    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def _json_safe(data: Any) -> Any:
    """将 numpy 标量与非有限浮点数转换为可写入 JSON 的值。"""

    if isinstance(data, dict):
        return {str(key): _json_safe(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [_json_safe(item) for item in data]
    if isinstance(data, np.ndarray):
        return [_json_safe(item) for item in data.tolist()]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        value = float(data)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(data, complex):
        return [_json_safe(data.real), _json_safe(data.imag)]
    return data


def read_data_from_json(json_file_path: str) -> Union[Dict[str, Any], List[Any]]:
    """
    从 JSON 文件中读取数据。

    Args:
        json_file_path (str): JSON 文件的路径。

    Returns:
        dict or list: 从 JSON 文件中读取的数据。可以是字典或列表。
    """

    with open(json_file_path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return data


def save_data_to_json(data: Union[Dict[str, Any], List[Any]], json_file_path: str) -> None:
    """
    将数据保存到 JSON 文件中，非有限浮点数以字符串形式写出。

    Args:
        data (dict or list): 要保存的数据，可以是字典或列表。
        json_file_path (str): JSON 文件的路径。

    Returns:
        None
    """
    if data is not None:
        with open(json_file_path, 'w', encoding='utf-8') as json_file:
            json.dump(_json_safe(data), json_file, ensure_ascii=False, indent=4)


def save_rows_to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], csv_file_path: str) -> None:
    """
    将表格数据写入 CSV，数值统一使用 17 位有效数字。

    Args:
        header (Sequence[str]): 列名。
        rows (Iterable[Sequence[Any]]): 数据行。
        csv_file_path (str): 输出路径。

    Returns:
        None
    """

    with open(csv_file_path, 'w', encoding='utf-8', newline='') as csv_file:
        writer = csv.writer(csv_file, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(value) for value in row])


def read_rows_from_csv(csv_file_path: str) -> List[Dict[str, str]]:
    """
    读取 CSV 文件为字典列表。

    Args:
        csv_file_path (str): CSV 文件路径。

    Returns:
        list of dict: 每行一个字典，键为列名。
    """

    with open(csv_file_path, mode='r', encoding='utf-8') as csv_file:
        return list(csv.DictReader(csv_file))
