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

"""实验室各模块共用的异常类型。

所有计算类异常继承 ``LabError``（本身是 ``ValueError``），命令行据此映射退出码：
``ConfigError`` 为 2，其余 ``LabError`` 为 3。
"""


class LabError(ValueError):
    """计算模块抛出的异常基类。"""


class InputError(LabError):
    """输入参数不合法。"""


class CapabilityError(LabError):
    """请求超出实现能力，例如导数阶数超过上限。"""


class PreconditionError(LabError):
    """操作的前置条件不满足。"""


class DegenerateInputError(LabError):
    """输入退化，例如符号在扫描网格上取零。"""


class SingularityError(LabError):
    """计算中遇到奇点，例如 a(w)+z 为零。"""


class DomainError(LabError):
    """参数落在比较函数的定义域之外。"""


class RangeError(LabError):
    """结果超出可信范围，例如 λ 超过可信谱上界。"""


class AccuracyError(LabError):
    """数值积分未达到要求的精度。"""


class ResolutionError(LabError):
    """谱截断尾项过大，需要更大的基或更大的 t。"""


class FitQualityError(LabError):
    """外推样本不单调或噪声过大。"""


class ConfigError(ValueError):
    """实验配置无法解析或未通过校验。"""
