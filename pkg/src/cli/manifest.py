"""
Experiment configuration files: parsing, validation, hashing and the run manifest.

Configs are INI text with one section per package:

    [field]       n_max, M, mu, alpha1, alpha2, beta
    [operators]   force_kind, force_amplitude, force_modes, c_phi, force_eta1
    [noise]       kind, K, amplitude_scale, amplitude_decay, kappa_target, ell_target, eta1, seed
    [integrator]  dt, T_end, cutoff_N, save_stride, initial_kind, initial_energy, initial_file, nonlinear
    [estimators]  window_start, eta_fraction, as_lambda_fraction, holder_delta, moment_p,
                  constant_mode, bdg_constant, identity_states, survey_pairs, resolutions,
                  budget_tolerance, holder_tolerance

Any key can be overridden from the environment as <PREFIX><SECTION>__<KEY>.
"""
import configparser
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Literal, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from src.core.errors import ConfigurationError
from src.field.basis import PhysicalParams
from src.field.grid import DEALIAS_FACTOR
from src.field.state import load_state
from src.integrator.config import InitialLaw, SimConfig, cached_basis
from src.integrator.cutoff import CutoffSpec
from src.noise.diffusion import build_noise_model
from src.operators.forcing import ForceModel, mode_profile

logger = logging.getLogger(__name__)

EXPERIMENT_KINDS = ("simulate", "identities", "monotonicity", "apriori", "stability", "holder")
# kinds that reduce an ensemble; mean and standard error need two paths
ENSEMBLE_KINDS = ("simulate", "apriori", "stability", "holder")
ExperimentKind = Literal["simulate", "identities", "monotonicity", "apriori", "stability", "holder"]

DEFAULT_ENV_PREFIX = "THIRDGRADE_"


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FieldSection(_Section):
    n_max: int = Field(default=8, ge=1)
    M: Optional[int] = Field(default=None, ge=1, description="grid resolution; defaults to 4*n_max + 2")
    mu: float = 1.0
    alpha1: float = 0.1
    alpha2: float = 0.0
    beta: float = 1.0

    @property
    def resolution(self) -> int:
        return self.M if self.M is not None else 4 * self.n_max + 2


class OperatorsSection(_Section):
    force_kind: Literal["zero", "constant_field", "decaying"] = "zero"
    force_amplitude: float = 0.0
    force_modes: str = "1,0"
    c_phi: float = Field(default=0.0, ge=0.0)
    force_eta1: float = 0.0

    def wavevectors(self) -> List[Tuple[int, int]]:
        """Parse "kx,ky; kx,ky"."""
        out = []
        for item in self.force_modes.split(";"):
            if not item.strip():
                continue
            kx, ky = (int(v) for v in item.split(","))
            out.append((kx, ky))
        return out


class NoiseSection(_Section):
    kind: Literal["additive", "linear_multiplicative", "decaying_multiplicative"] = "additive"
    K: int = Field(default=16, ge=0)
    amplitude_scale: float = Field(default=0.1, ge=0.0)
    amplitude_decay: float = 1.0
    kappa_target: Optional[float] = None
    ell_target: Optional[float] = None
    eta1: float = 0.0
    seed: int = Field(default=0, ge=0, lt=2 ** 64)


class IntegratorSection(_Section):
    dt: float = 1e-3
    T_end: float = 1.0
    cutoff_N: float = math.inf
    save_stride: int = 10
    initial_kind: Literal["zero", "lowest_modes", "random", "explicit"] = "lowest_modes"
    initial_energy: float = 1.0
    initial_file: Optional[str] = None
    nonlinear: bool = True


class EstimatorsSection(_Section):
    window_start: float = 1.0
    eta_fraction: float = Field(default=0.5, gt=0.0, lt=1.0)
    as_lambda_fraction: float = Field(default=0.25, gt=0.0)
    holder_delta: float = Field(default=0.25, gt=0.0, lt=1.0)
    moment_p: float = Field(default=4.0, ge=1.0)
    constant_mode: Literal["empirical", "spectral"] = "empirical"
    bdg_constant: float = Field(default=3.0, gt=0.0)
    identity_states: int = Field(default=200, ge=1)
    survey_pairs: int = Field(default=1000, ge=1)
    resolutions: str = "4,8,16"
    budget_tolerance: float = Field(default=0.2, gt=0.0)
    holder_tolerance: float = Field(default=0.25, gt=0.0)

    @field_validator("resolutions")
    @classmethod
    def _levels(cls, value: str) -> str:
        levels = [int(v) for v in value.split(",") if v.strip()]
        if not levels or min(levels) < 1:
            raise ValueError("resolutions must be a comma-separated list of n_max >= 1")
        return value

    def levels(self) -> List[int]:
        return [int(v) for v in self.resolutions.split(",") if v.strip()]


SECTIONS = {
    "field": FieldSection,
    "operators": OperatorsSection,
    "noise": NoiseSection,
    "integrator": IntegratorSection,
    "estimators": EstimatorsSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated config file: the simulation config plus the estimator knobs."""

    sim: SimConfig
    sections: Dict[str, BaseModel]
    base_dir: Optional[Path] = None

    @property
    def estimators(self) -> EstimatorsSection:
        return self.sections["estimators"]

    @property
    def seed(self) -> int:
        return self.sections["noise"].seed

    def canonical(self) -> dict:
        """Section values with defaults resolved, so an omitted M and its default hash alike."""
        out = {name: section.model_dump(mode="json") for name, section in sorted(self.sections.items())}
        out["field"]["M"] = self.sections["field"].resolution
        return out

    @property
    def config_hash(self) -> str:
        return config_hash(self.canonical())

    def at_resolution(self, n_max: int) -> "ExperimentConfig":
        """Same physics on another Galerkin level, keeping M/n_max."""
        field_section = self.sections["field"]
        ratio = field_section.resolution / field_section.n_max
        sections = dict(self.sections)
        sections["field"] = field_section.model_copy(update={"n_max": n_max, "M": int(math.ceil(ratio * n_max))})
        config, errors = build_config(sections, base_dir=self.base_dir)
        if errors:
            raise ConfigurationError("; ".join(errors))
        return config

    def with_seed(self, seed: int) -> "ExperimentConfig":
        sections = dict(self.sections)
        sections["noise"] = sections["noise"].model_copy(update={"seed": seed})
        config, errors = build_config(sections, base_dir=self.base_dir)
        if errors:
            raise ConfigurationError("; ".join(errors))
        return config


def config_hash(canonical: Mapping) -> str:
    """sha256 of the sorted-key JSON rendering; unaffected by key order in the file."""
    text = json.dumps(canonical, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _env_overrides(parser: configparser.ConfigParser, env: Mapping[str, str], prefix: str) -> None:
    for name, value in env.items():
        if not name.startswith(prefix) or "__" not in name:
            continue
        section, key = name[len(prefix):].split("__", 1)
        section = section.lower()
        fields = SECTIONS[section].model_fields if section in SECTIONS else {}
        key = next((f for f in fields if f.lower() == key.lower()), key.lower())
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)
        logger.info(f"Environment override {section}.{key} = {value}")


def _format_error(section: str, error: dict) -> str:
    where = ".".join(str(p) for p in error.get("loc", ()))
    return f"[{section}] {where}: {error.get('msg')}"


def _initial_law(integrator: IntegratorSection, sim_basis, base_dir: Optional[Path]) -> InitialLaw:
    if integrator.initial_kind != "explicit":
        return InitialLaw(kind=integrator.initial_kind, energy=integrator.initial_energy)
    if not integrator.initial_file:
        raise ConfigurationError("initial_kind = explicit needs initial_file")
    path = Path(integrator.initial_file)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return InitialLaw(kind="explicit", state=load_state(path, sim_basis))


def build_config(sections: Mapping[str, BaseModel], base_dir: Optional[Path] = None):
    """
    Assemble a SimConfig from validated sections and collect every constraint violation.

    Each part (parameters, noise, force, initial law, cut-off) is checked on its own, so
    a broken part never hides the violations of the others.

    Returns:
        (ExperimentConfig or None, list of error messages)
    """
    field_s: FieldSection = sections["field"]
    ops: OperatorsSection = sections["operators"]
    noise_s: NoiseSection = sections["noise"]
    integ: IntegratorSection = sections["integrator"]
    errors: List[str] = []

    params = None
    try:
        params = PhysicalParams(mu=field_s.mu, alpha1=field_s.alpha1, alpha2=field_s.alpha2, beta=field_s.beta)
    except ValidationError as e:
        errors.extend(_format_error("field", err) for err in e.errors())

    noise = None
    if noise_s.kind == "decaying_multiplicative" and not noise_s.eta1 > 0.0:
        errors.append(f"[noise] eta1 must be > 0 for decaying noise (DIFSTAT e^(-eta1 t)), got {noise_s.eta1}")
    else:
        try:
            noise = build_noise_model(
                noise_s.kind,
                noise_s.K,
                amplitude_scale=noise_s.amplitude_scale,
                amplitude_decay=noise_s.amplitude_decay,
                eta1=noise_s.eta1,
                seed=noise_s.seed,
            )
        except ConfigurationError as e:
            errors.append(f"[noise] {e}")
    if noise is not None:
        if noise_s.kappa_target is not None and noise.kappa > noise_s.kappa_target:
            errors.append(f"[noise] Lipschitz constant {noise.kappa:.6g} exceeds kappa_target {noise_s.kappa_target:.6g}")
        if noise_s.ell_target is not None and noise.ell > noise_s.ell_target:
            errors.append(f"[noise] growth constant {noise.ell:.6g} exceeds ell_target {noise_s.ell_target:.6g}")

    # the basis only needs alpha1 for its eigenvalues; a rejected alpha1 is already reported
    basis = cached_basis(field_s.n_max, max(field_s.alpha1, 0.0))
    force = initial = cutoff = None
    try:
        if ops.force_kind == "zero":
            force = ForceModel(kind="zero")
        else:
            payload = mode_profile(basis, ops.force_amplitude, ops.wavevectors())
            force = ForceModel(kind=ops.force_kind, c_phi=ops.c_phi, eta1=ops.force_eta1, payload=payload)
    except (ConfigurationError, ValueError) as e:
        errors.append(f"[operators] {e}")
    try:
        initial = _initial_law(integ, basis, base_dir)
    except (ConfigurationError, ValueError, OSError) as e:
        errors.append(f"[integrator] {e}")
    try:
        cutoff = CutoffSpec(N=integ.cutoff_N)
    except (ConfigurationError, ValueError) as e:
        errors.append(f"[integrator] {e}")

    if any(part is None for part in (params, noise, force, initial, cutoff)):
        errors.extend(_structural_errors(field_s, integ))
        if params is not None:
            errors.extend(params.admissibility_errors())
        return None, errors

    sim = SimConfig(
        n_max=field_s.n_max,
        M=field_s.resolution,
        dt=integ.dt,
        T_end=integ.T_end,
        params=params,
        cutoff=cutoff,
        force=force,
        noise=noise,
        initial=initial,
        save_stride=integ.save_stride,
        nonlinear=integ.nonlinear,
    )
    errors.extend(sim.violations())
    if errors:
        return None, errors
    return ExperimentConfig(sim=sim, sections=dict(sections), base_dir=base_dir), []


def _structural_errors(field_s: FieldSection, integ: IntegratorSection) -> List[str]:
    """Grid, step and sampling checks that need no assembled SimConfig."""
    errors = []
    if not integ.dt > 0.0:
        errors.append(f"dt must be > 0, got {integ.dt}")
    if not integ.T_end >= integ.dt:
        errors.append(f"T_end={integ.T_end} must be >= dt={integ.dt}")
    if field_s.resolution < DEALIAS_FACTOR * field_s.n_max:
        errors.append(
            f"M={field_s.resolution} violates the dealiasing constraint "
            f"M >= {DEALIAS_FACTOR}*n_max = {DEALIAS_FACTOR * field_s.n_max}"
        )
    if integ.save_stride < 1:
        errors.append(f"save_stride must be >= 1, got {integ.save_stride}")
    if integ.initial_energy < 0.0:
        errors.append(f"initial energy must be >= 0, got {integ.initial_energy}")
    return errors


def validate_config(
    text: str,
    env: Optional[Mapping[str, str]] = None,
    prefix: str = DEFAULT_ENV_PREFIX,
    base_dir: Optional[Path] = None,
) -> Tuple[Optional[ExperimentConfig], List[str]]:
    """
    Parse and validate config text, reporting every violation at once.

    Args:
        text: INI config text
        env: Environment for overrides (defaults to os.environ)
        prefix: Override prefix
        base_dir: Directory that relative paths in the config refer to

    Returns:
        (ExperimentConfig, []) on success, (None, errors) otherwise
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        return None, [f"unreadable config: {e}"]
    _env_overrides(parser, os.environ if env is None else env, prefix)

    errors = [f"unknown section [{name}]" for name in parser.sections() if name not in SECTIONS]
    sections = {}
    for name, model in SECTIONS.items():
        values = dict(parser.items(name)) if parser.has_section(name) else {}
        try:
            sections[name] = model(**values)
        except ValidationError as e:
            errors.extend(_format_error(name, err) for err in e.errors())
    if errors:
        return None, errors

    config, build_errors = build_config(sections, base_dir=base_dir)
    return config, build_errors


def load_config(path: Path, env: Optional[Mapping[str, str]] = None, prefix: str = DEFAULT_ENV_PREFIX):
    """Read and validate a config file; unreadable files are reported as errors."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        return None, [f"cannot read config {path}: {e}"]
    return validate_config(text, env=env, prefix=prefix, base_dir=path.parent)


@dataclass(frozen=True)
class RunManifest:
    config_path: Path
    config: ExperimentConfig
    seed: int
    n_paths: int
    workers: int
    out_dir: Path
    kind: ExperimentKind

    @property
    def sim(self) -> SimConfig:
        return self.config.sim

    @property
    def config_hash(self) -> str:
        return self.config.config_hash


def build_manifest(
    config_path: Path,
    kind: str,
    seed: Optional[int],
    n_paths: int,
    workers: int,
    out_dir: Path,
    env: Optional[Mapping[str, str]] = None,
    prefix: str = DEFAULT_ENV_PREFIX,
) -> Tuple[Optional[RunManifest], List[str]]:
    """
    Resolve a manifest from command-line values.

    A seed given here replaces the [noise] seed of the file. Stability runs also
    require the monotonicity region, and ensemble kinds at least two paths.

    Returns:
        (RunManifest, []) or (None, errors)
    """
    errors = []
    if kind not in EXPERIMENT_KINDS:
        errors.append(f"unknown experiment kind {kind!r}; expected one of {EXPERIMENT_KINDS}")
    min_paths = 2 if kind in ENSEMBLE_KINDS else 1
    if n_paths < min_paths:
        errors.append(f"--paths must be >= {min_paths} for {kind}, got {n_paths}")
    config, config_errors = load_config(config_path, env=env, prefix=prefix)
    errors.extend(config_errors)
    if config is not None and seed is not None:
        try:
            config = config.with_seed(seed)
        except ConfigurationError as e:
            errors.append(str(e))
    if config is not None and kind == "stability":
        errors.extend(config.sim.params.admissibility_errors(stability=True))

    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            errors.append(f"output directory {out_dir} is not writable")
    except OSError as e:
        errors.append(f"cannot create output directory {out_dir}: {e}")

    if errors:
        return None, errors
    manifest = RunManifest(
        config_path=Path(config_path),
        config=config,
        seed=config.seed,
        n_paths=n_paths,
        workers=max(1, workers),
        out_dir=out_dir,
        kind=kind,
    )
    logger.info(f"Manifest: kind={kind}, paths={n_paths}, workers={manifest.workers}, hash={manifest.config_hash[:12]}")
    return manifest, []
