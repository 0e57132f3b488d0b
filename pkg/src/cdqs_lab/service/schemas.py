"""Pydantic request/response models for the verification service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class VerifyRequest(BaseModel):
    protocol: str = Field(description="registry name or config file path")
    n: int = Field(default=2, ge=1, le=6)
    tolerance: float = Field(default=1e-6, gt=0, le=0.1)
    seed: int = 0
    deterministic: bool = True


class TransformRequest(BaseModel):
    op: Literal["negate", "and", "or", "amplify"]
    protocol: str = "eq"
    n: int = Field(default=1, ge=1, le=6)
    noise_eps: float = Field(default=0.0, ge=0.0, lt=1.0)
    code: str = "five_qubit"
    verify: bool = True
    tolerance: float = Field(default=1e-6, gt=0, le=0.1)
    seed: int = 0
    deterministic: bool = True


class ReduceRequest(BaseModel):
    kind: Literal["oneway", "pp", "qip", "zk"]
    protocol: str = "eq_pp"
    n: int = Field(default=1, ge=1, le=6)
    mode: Literal["oracle", "sampled"] = "oracle"
    samples: Optional[int] = Field(default=None, ge=1)
    seed: int = 0
    ell: int = Field(default=2, ge=1, le=4)
    noise_eps: float = Field(default=0.0, ge=0.0, lt=1.0)
    tolerance: float = Field(default=1e-6, gt=0, le=0.1)
    deterministic: bool = True


class RunResponse(BaseModel):
    exit_code: int
    passed: Optional[bool] = None
    report: dict
    canonical: str


class ProtocolInfo(BaseModel):
    name: str
    description: str


class ErrorBody(BaseModel):
    kind: str
    message: str
    exit_code: int
