import os
from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

# 在类定义之前加载环境变量
ENV = os.getenv("ENV", "production")
load_dotenv(f".env.{ENV}")


class BroomSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file_encoding="utf-8",
        extra="ignore"
    )

    """broom filter 配置项（构造参数优先，这里只提供默认值）"""
    master_seed: int = Field(default=1, validation_alias="BROOM_SEED")
    c_hash: int = Field(default=4, validation_alias="BROOM_C_HASH")
    reclaim_batch: int = Field(default=3, validation_alias="BROOM_RECLAIM_BATCH")

    # 打包存储配置
    group_width: int = Field(default=64, validation_alias="BROOM_GROUP_WIDTH")
    buffer_bits: int = Field(default=256, validation_alias="BROOM_BUFFER_BITS")
    alpha_floor: float = Field(default=0.05, validation_alias="BROOM_ALPHA_FLOOR")
    build: str = Field(default="packed", validation_alias="BROOM_BUILD")

    # 第二层 / backyard 容量
    secondary_factor: int = Field(default=2, validation_alias="BROOM_SECONDARY_FACTOR")
    backyard_factor: int = Field(default=2, validation_alias="BROOM_BACKYARD_FACTOR")

    # 调试检查（每次回收后校验 generation/frontier 一致性）
    debug_checks: bool = Field(default=False, validation_alias="BROOM_DEBUG_CHECKS")


class AppSettings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file_encoding="utf-8",
        extra="ignore"
    )

    app_version: str = Field(default="0.1.0", validation_alias="APP_VERSION")
    log_level: str = Field(default="INFO", validation_alias="LOG_LEVEL")
    results_dir: str = Field(default="results", validation_alias="RESULTS_DIR")
    workers: int = Field(default=1, validation_alias="WORKERS")


# 实例化配置对象
env = AppSettings()
settings = BroomSettings()
