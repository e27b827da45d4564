"""
CSL噪声谱数值平台 - 源码根包

子包：
- common    共享基础设施（错误、配置、设置、环境与日志）
- models    光机系统参数、配置语法与稳定性
- geometry  坍缩率 λ 的闭式解与体素计算
- spectrum  位移噪声谱、面积比与参数扫描
- langevin  量子朗之万方程的随机模拟与 Welch 估计
- cli       命令行子命令、预设与输出
"""

__version__ = "1.0.0"
__author__ = "CSL Spectra Development Team"
