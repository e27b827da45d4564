"""
运行时设置模块

依据文档：《DESIGN.md》common 模块 配置管理
模块功能：环境变量处理（预设目录、默认预设、线程数、日志）
版本：V1.0
创建日期：2026-10-18
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parents[2]
SHIPPED_PRESET_DIR = PROJECT_ROOT / "config" / "presets"


class AppSettings(BaseSettings):
    """应用运行时设置（环境变量前缀 CSLSPEC_）"""

    model_config = SettingsConfigDict(
        env_prefix="CSLSPEC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    PRESET_DIR: Optional[Path] = Field(default=None, description="用户预设目录（追加到内置预设之后）")
    DEFAULT_PRESET: str = Field(default="fig2a_15ng", description="未指定参数来源时使用的预设")
    THREADS: Optional[int] = Field(default=None, description="最大工作线程数（None=自动）")
    LOG_LEVEL: str = Field(default="INFO", description="日志级别")
    LOG_DIR: Optional[Path] = Field(default=None, description="日志目录（None=仅控制台）")

    @field_validator("THREADS")
    @classmethod
    def validate_threads(cls, v):
        """验证线程数"""
        if v is not None and v < 1:
            raise ValueError("线程数必须 ≥ 1")
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v):
        """验证日志级别"""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"日志级别必须是: {', '.join(valid_levels)}")
        return v.upper()

    @field_validator("PRESET_DIR")
    @classmethod
    def validate_preset_dir(cls, v):
        """预设目录不存在时仅告警"""
        if v is not None and not Path(v).is_dir():
            logger.warning(f"预设目录不存在: {v}")
        return v


@lru_cache()
def get_settings() -> AppSettings:
    """获取运行时设置实例（缓存）"""
    return AppSettings()
