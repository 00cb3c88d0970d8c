"""
Inquiry cycle simulation.

The inquirer alternates between two phases: the diversive phase raises the
prediction error toward δ_BS (novelty seeking), the specific phase lowers it
toward δ_KLD (evidence seeking). Each visited δ is recorded with its gains,
its surprise and an emotion label from the position of that surprise relative
to the optimal surprises S_KLD and S_BS.
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from epigain.errors import SimulationRefusedError
from epigain.model.gaussian import surprise
from epigain.model.params import ModelParams
from epigain.numerics.gains import information_gains
from epigain.numerics.quadrature import QuadratureConfig
from epigain.observability.logger import get_logger
from epigain.optimize.optima import OptimaRecord, find_optima
from epigain.tables import Destination, write_frame

logger = get_logger(__name__)

TRACE_COLUMNS = ["step", "phase", "delta", "surprise", "kld", "bs", "ig", "emotion"]


class Phase(str, Enum):
    DIVERSIVE = "diversive"
    SPECIFIC = "specific"


class Emotion(str, Enum):
    """Emotion regions along the surprise axis, in increasing order."""
    BOREDOM = "boredom"
    PLEASURE = "pleasure"
    OPTIMAL_BAND = "optimal-band"
    INTEREST = "interest"
    CONFUSION = "confusion"


class StepMode(str, Enum):
    JUMP = "jump"
    RELAX = "relax"


class EmotionThresholds(BaseModel):
    """Presentation thresholds relative to S_KLD and S_BS."""

    model_config = ConfigDict(frozen=True)

    boredom_frac: float = Field(default=0.5, gt=0, lt=1, description="Boredom below this × S_KLD")
    confusion_frac: float = Field(default=1.5, gt=1, description="Confusion above this × S_BS")


class InquiryConfig(BaseModel):
    """Settings for one simulated inquiry."""

    model_config = ConfigDict(frozen=True)

    params: ModelParams
    initial_delta: float = Field(default=0.0, ge=0)
    cycles: int = Field(default=3, ge=1, description="Number of diversive/specific pairs")
    step_mode: StepMode = StepMode.JUMP
    relax_rate: float = Field(default=1.0, gt=0, le=1, description="Fraction of the gap closed per step")
    label_thresholds: EmotionThresholds = Field(default_factory=EmotionThresholds)
    arrival_tol: float = Field(default=1e-4, gt=0, description="Distance counted as arrival")
    max_steps: int = Field(default=100_000, gt=1)
    quadrature: QuadratureConfig = Field(default_factory=QuadratureConfig)
    optimizer_tol: float = Field(default=1e-5, gt=0)


class InquiryStep(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(..., ge=0)
    phase: Phase
    delta: float
    surprise: float
    kld: float = Field(..., ge=0)
    bs: float = Field(..., ge=0)
    emotion: Emotion

    @computed_field  # type: ignore[prop-decorator]
    @property
    def ig(self) -> float:
        return self.kld + self.bs


class InquiryTrace(BaseModel):
    config: InquiryConfig
    steps: List[InquiryStep]
    optima: OptimaRecord

    @model_validator(mode="after")
    def _indices_are_sequential(self) -> "InquiryTrace":
        for position, step in enumerate(self.steps):
            if step.index != position:
                raise ValueError(f"step {position} carries index {step.index}")
        return self

    @property
    def deltas(self) -> List[float]:
        return [step.delta for step in self.steps]

    def amplitudes(self) -> List[float]:
        """|Δδ| between consecutive phase ends (turning points)."""
        turns = [
            step.delta
            for step, following in zip(self.steps[1:], self.steps[2:])
            if step.phase is not following.phase
        ]
        return [abs(b - a) for a, b in zip(turns, turns[1:])]


def emotion_cuts(
    optima: OptimaRecord, thresholds: Optional[EmotionThresholds] = None
) -> Tuple[float, float]:
    """
    (boredom cut, confusion cut) on the surprise axis.

    b·S_KLD and c·S_BS for positive surprises. Margins come from |S_KLD| and
    |S_BS|, so the cuts stay outside the band when surprise is negative.
    """
    thresholds = thresholds or EmotionThresholds()
    boredom = optima.s_kld - (1.0 - thresholds.boredom_frac) * abs(optima.s_kld)
    confusion = optima.s_bs + (thresholds.confusion_frac - 1.0) * abs(optima.s_bs)
    return boredom, confusion


def label_emotion(
    surprise_value: float,
    optima: OptimaRecord,
    thresholds: Optional[EmotionThresholds] = None,
) -> Emotion:
    """
    Emotion region of a surprise value.

    boredom < boredom cut ≤ pleasure < S_KLD ≤ optimal-band ≤ S_BS < interest
    ≤ confusion cut < confusion, with the cuts from `emotion_cuts`.
    """
    boredom, confusion = emotion_cuts(optima, thresholds)
    if surprise_value < boredom:
        return Emotion.BOREDOM
    if surprise_value < optima.s_kld:
        return Emotion.PLEASURE
    if surprise_value <= optima.s_bs:
        return Emotion.OPTIMAL_BAND
    if surprise_value <= confusion:
        return Emotion.INTEREST
    return Emotion.CONFUSION


def opening_phase(initial_delta: float, optima: OptimaRecord) -> Phase:
    if initial_delta > optima.delta_bs:
        return Phase.SPECIFIC
    return Phase.DIVERSIVE


def simulate(config: InquiryConfig, optima: Optional[OptimaRecord] = None) -> InquiryTrace:
    """
    Run the alternating inquiry cycle.

    Args:
        config: Simulation settings
        optima: Precomputed optima for config.params (found when omitted)

    Returns:
        Trace whose first step is the initial δ, followed by every δ visited

    Raises:
        SimulationRefusedError: If any objective failed to converge
    """
    if optima is None:
        optima = find_optima(config.params, config.quadrature, tol=config.optimizer_tol)
    if not optima.all_converged:
        raise SimulationRefusedError({k.value: v for k, v in optima.converged.items()})

    cache: Dict[float, Tuple[float, float, float]] = {}

    def make_step(index: int, phase: Phase, delta: float) -> InquiryStep:
        if delta not in cache:
            kld, bs = information_gains(config.params, delta, config.quadrature)
            cache[delta] = (surprise(config.params, delta), kld, bs)
        s, kld, bs = cache[delta]
        return InquiryStep(
            index=index,
            phase=phase,
            delta=delta,
            surprise=s,
            kld=kld,
            bs=bs,
            emotion=label_emotion(s, optima, config.label_thresholds),
        )

    phase = opening_phase(config.initial_delta, optima)
    delta = config.initial_delta
    steps = [make_step(0, phase, delta)]
    arrivals = 0

    while arrivals < 2 * config.cycles:
        if len(steps) >= config.max_steps:
            logger.warning("inquiry.step_budget_exhausted", steps=len(steps), arrivals=arrivals)
            break
        target = optima.delta_bs if phase is Phase.DIVERSIVE else optima.delta_kld
        if abs(target - delta) <= config.arrival_tol:
            # already there: count the arrival without recording a zero-length step
            arrivals += 1
            phase = Phase.SPECIFIC if phase is Phase.DIVERSIVE else Phase.DIVERSIVE
            continue
        if config.step_mode is StepMode.JUMP:
            delta = target
        else:
            delta = delta + config.relax_rate * (target - delta)
        arrived = abs(target - delta) <= config.arrival_tol
        if arrived:
            delta = target
        steps.append(make_step(len(steps), phase, delta))
        if arrived:
            arrivals += 1
            phase = Phase.SPECIFIC if phase is Phase.DIVERSIVE else Phase.DIVERSIVE
            logger.debug("inquiry.phase_switched", step=len(steps) - 1, phase=phase.value)

    return InquiryTrace(config=config, steps=steps, optima=optima)


def export_trace_csv(trace: InquiryTrace, destination: Destination) -> int:
    """Write `step,phase,delta,surprise,kld,bs,ig,emotion` rows."""
    frame = pd.DataFrame(
        [
            {
                "step": step.index,
                "phase": step.phase.value,
                "delta": step.delta,
                "surprise": step.surprise,
                "kld": step.kld,
                "bs": step.bs,
                "ig": step.ig,
                "emotion": step.emotion.value,
            }
            for step in trace.steps
        ],
        columns=TRACE_COLUMNS,
    )
    return write_frame(frame, destination)
