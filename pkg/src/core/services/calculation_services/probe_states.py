"""
Probe State Service for the Zeno vacuum-scissors simulator.

This module implements the mode-b state factory:
- Fock, coherent, phase-squeezed and user-supplied number-basis coefficients
- Displacement and squeeze operator exponentials on a padded working space
- Truncation tail checks with a suggested cutoff
- Photon statistics (mean, variance, Mandel Q, vacuum weight)
- Vacuum stripping of a probe state
- The probe mini-syntax parser used by the command line
"""

import logging
from pathlib import Path
from typing import NamedTuple, Optional, Union

import numpy as np
from scipy import stats

from src.core.models.data_models.mode_space import ModeSpace
from src.core.models.data_models.probe_state import PhotonStatistics, ProbeKind, ProbeStateSpec
from src.core.services.calculation_services.fock_space import fock_space_calculator
from src.core.utils.error_handling import ProbeSpecError, TruncationError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_PROBE_CUTOFF = 40
DEFAULT_SQUEEZE_PADDING = 40
DEFAULT_TAIL_TOLERANCE = 1e-10
DEFAULT_CUSTOM_NORM_WARNING = 1e-6
# Mean photon numbers below this make the Mandel Q undefined
VACUUM_MEAN = 1e-15


class StrippedProbe(NamedTuple):
    """Probe with its vacuum component removed."""

    stripped: np.ndarray
    alpha0: complex
    is_vacuum: bool


class ProbeStateFactory:
    """Factory for probe-mode number-basis coefficient vectors."""

    def __init__(self, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
                 squeeze_padding: int = DEFAULT_SQUEEZE_PADDING,
                 custom_norm_warning: float = DEFAULT_CUSTOM_NORM_WARNING):
        """Initialize the probe state factory."""
        self.tail_tolerance = tail_tolerance
        self.squeeze_padding = squeeze_padding
        self.custom_norm_warning = custom_norm_warning
        self.builders = {
            ProbeKind.FOCK: self._build_fock,
            ProbeKind.COHERENT: self._build_coherent,
            ProbeKind.PHASE_SQUEEZED: self._build_phase_squeezed,
            ProbeKind.CUSTOM: self._build_custom,
        }

    def build_state(self, spec: ProbeStateSpec) -> np.ndarray:
        """
        Build the normalized coefficient vector alpha_m of a probe specification.

        Args:
            spec: Probe specification

        Returns:
            Complex vector of length spec.cutoff with unit norm
        """
        state = self.builders[spec.kind](spec)
        logger.debug(f"Built probe {spec.label or spec.kind.value} on cutoff {spec.cutoff}")
        return state

    def _build_fock(self, spec: ProbeStateSpec) -> np.ndarray:
        return ModeSpace(spec.cutoff).basis_state(spec.fock_number)

    def _build_coherent(self, spec: ProbeStateSpec) -> np.ndarray:
        alpha = spec.amplitude
        mean = abs(alpha) ** 2
        tail = float(stats.poisson.sf(spec.cutoff - 1, mean))
        if tail > self.tail_tolerance:
            suggested = int(stats.poisson.isf(self.tail_tolerance, mean)) + 1
            raise TruncationError(
                f"Coherent amplitude {alpha} leaves tail mass {tail:.3e} beyond cutoff {spec.cutoff}",
                tail_mass=tail, cutoff=spec.cutoff, suggested_cutoff=max(suggested, spec.cutoff + 1),
            )

        coefficients = np.empty(spec.cutoff, dtype=complex)
        coefficients[0] = np.exp(-0.5 * mean)
        for k in range(1, spec.cutoff):
            coefficients[k] = coefficients[k - 1] * alpha / np.sqrt(k)
        return fock_space_calculator.normalize(coefficients)

    def _build_phase_squeezed(self, spec: ProbeStateSpec) -> np.ndarray:
        working = ModeSpace(spec.cutoff + self.squeeze_padding)
        squeezed = self.squeezed_vacuum_padded(spec.squeezing, working)
        state = self.displacement(spec.amplitude, working) @ squeezed
        return self._truncate(state, spec.cutoff, f"squeezed state {spec.label}")

    def _build_custom(self, spec: ProbeStateSpec) -> np.ndarray:
        coefficients = np.asarray(spec.coefficients, dtype=complex)
        norm = fock_space_calculator.norm(coefficients)
        if norm == 0.0:
            raise ValidationError("Custom probe coefficients are all zero", field="coefficients")
        if abs(norm - 1.0) > self.custom_norm_warning:
            logger.warning(f"Custom probe norm {norm:.8f} deviates from 1; renormalizing")
        coefficients = coefficients / norm

        if len(coefficients) < spec.cutoff:
            coefficients = np.concatenate([coefficients, np.zeros(spec.cutoff - len(coefficients), dtype=complex)])
        return self._truncate(coefficients, spec.cutoff, f"custom probe {spec.label}")

    def _truncate(self, state: np.ndarray, cutoff: int, what: str) -> np.ndarray:
        """Cut a working-space vector to cutoff levels, check the tail, renormalize."""
        weights = np.abs(state) ** 2
        tail = float(weights[cutoff:].sum())
        if tail > self.tail_tolerance:
            # tails[c] = mass at or beyond level c
            tails = np.cumsum(weights[::-1])[::-1]
            within = np.nonzero(tails <= self.tail_tolerance)[0]
            suggested = int(within[0]) if within.size else len(state)
            raise TruncationError(
                f"{what} leaves tail mass {tail:.3e} beyond cutoff {cutoff}",
                tail_mass=tail, cutoff=cutoff, suggested_cutoff=max(suggested, cutoff + 1),
            )
        if tail > 0.0:
            logger.debug(f"Truncating {what}: tail mass {tail:.3e}")
        return fock_space_calculator.normalize(state[:cutoff])

    def displacement(self, alpha: complex, space: ModeSpace) -> np.ndarray:
        """Displacement operator exp(alpha b^dag - alpha* b)."""
        b, b_dag, _ = fock_space_calculator.ladder_ops(space)
        generator = alpha * b_dag - np.conj(alpha) * b
        return fock_space_calculator.hermitian_propagator(-1j * generator, 1.0)

    def squeeze(self, epsilon: complex, space: ModeSpace) -> np.ndarray:
        """Squeeze operator exp(eps* b^2 / 2 - eps b^dag^2 / 2)."""
        b, b_dag, _ = fock_space_calculator.ladder_ops(space)
        generator = 0.5 * np.conj(epsilon) * (b @ b) - 0.5 * epsilon * (b_dag @ b_dag)
        return fock_space_calculator.hermitian_propagator(-1j * generator, 1.0)

    def squeezed_vacuum_padded(self, epsilon: complex, space: ModeSpace) -> np.ndarray:
        return self.squeeze(epsilon, space)[:, 0]

    def displaced_vacuum(self, alpha: complex, cutoff: int = DEFAULT_PROBE_CUTOFF) -> np.ndarray:
        """Coherent state built from the displacement exponential on a padded space."""
        working = ModeSpace(cutoff + self.squeeze_padding)
        state = self.displacement(alpha, working)[:, 0]
        return self._truncate(state, cutoff, f"displaced vacuum alpha={alpha}")

    def squeezed_vacuum(self, epsilon: complex, cutoff: int = DEFAULT_PROBE_CUTOFF) -> np.ndarray:
        """Squeezed vacuum built from the squeeze exponential on a padded space."""
        working = ModeSpace(cutoff + self.squeeze_padding)
        state = self.squeezed_vacuum_padded(epsilon, working)
        return self._truncate(state, cutoff, f"squeezed vacuum eps={epsilon}")

    def photon_statistics(self, state: np.ndarray) -> PhotonStatistics:
        """
        Photon-number moments of a normalized probe.

        Args:
            state: Number-basis coefficients

        Returns:
            PhotonStatistics; mandel_q is None for the vacuum
        """
        weights = np.abs(np.asarray(state)) ** 2
        levels = np.arange(len(weights), dtype=float)
        mean = float(np.dot(levels, weights))
        variance = max(float(np.dot(levels ** 2, weights)) - mean ** 2, 0.0)

        if mean < VACUUM_MEAN:
            logger.debug("Mandel Q undefined for a vacuum probe")
            mandel_q = None
        else:
            mandel_q = max((variance - mean) / mean, -1.0)

        return PhotonStatistics(
            mean=mean,
            variance=variance,
            mandel_q=mandel_q,
            vacuum_weight=float(min(max(weights[0], 0.0), 1.0)),
        )

    def strip_vacuum(self, state: np.ndarray) -> StrippedProbe:
        """Split a probe into its vacuum amplitude and the unnormalized rest."""
        state = np.asarray(state, dtype=complex)
        alpha0 = complex(state[0])
        stripped = state.copy()
        stripped[0] = 0.0
        is_vacuum = not np.any(stripped)
        if is_vacuum:
            logger.debug("Probe has no component outside the vacuum")
        return StrippedProbe(stripped=stripped, alpha0=alpha0, is_vacuum=is_vacuum)


# Global factory instance
probe_state_factory = ProbeStateFactory()


def build_state(spec: ProbeStateSpec) -> np.ndarray:
    """Normalized coefficient vector of a probe specification."""
    return probe_state_factory.build_state(spec)


def displaced_vacuum(alpha: complex, cutoff: int = DEFAULT_PROBE_CUTOFF) -> np.ndarray:
    return probe_state_factory.displaced_vacuum(alpha, cutoff)


def squeezed_vacuum(epsilon: complex, cutoff: int = DEFAULT_PROBE_CUTOFF) -> np.ndarray:
    return probe_state_factory.squeezed_vacuum(epsilon, cutoff)


def photon_statistics(state: np.ndarray) -> PhotonStatistics:
    """Mean, variance, Mandel Q and vacuum weight."""
    return probe_state_factory.photon_statistics(state)


def strip_vacuum(state: np.ndarray) -> StrippedProbe:
    """|Phi> - alpha0|0> together with alpha0."""
    return probe_state_factory.strip_vacuum(state)


def _parse_complex(token: str, spec: str) -> complex:
    try:
        return complex(token.strip().replace(" ", ""))
    except ValueError:
        raise ProbeSpecError(f"Cannot read number {token!r} in probe {spec!r}", spec=spec)


def _read_custom_coefficients(path: Path, spec: str) -> np.ndarray:
    """Read one `re im` coefficient per line."""
    try:
        table = np.loadtxt(path, ndmin=2, comments="#", dtype=float)
    except OSError as e:
        raise ProbeSpecError(f"Cannot read custom coefficient file {path}: {e}", spec=spec)
    except ValueError as e:
        raise ProbeSpecError(f"Malformed custom coefficient file {path}: {e}", spec=spec)

    if table.size == 0:
        raise ProbeSpecError(f"Custom coefficient file {path} is empty", spec=spec)
    if table.shape[1] == 1:
        return table[:, 0].astype(complex)
    if table.shape[1] == 2:
        return table[:, 0] + 1j * table[:, 1]
    raise ProbeSpecError(f"Custom coefficient lines must hold 're im', got {table.shape[1]} columns",
                         spec=spec)


def parse_probe_spec(text: str, cutoff: int = DEFAULT_PROBE_CUTOFF,
                     base_dir: Optional[Union[str, Path]] = None) -> ProbeStateSpec:
    """
    Parse the probe mini-syntax.

    fock:<m> | coherent:<re>[,<im>] | squeezed:<eps>,<alpha> | custom:@<file>

    Args:
        text: Probe specification string
        cutoff: Probe Fock cutoff
        base_dir: Directory that relative custom files are resolved against

    Returns:
        ProbeStateSpec labelled with the original text
    """
    spec = text.strip()
    kind, sep, body = spec.partition(":")
    kind = kind.strip().lower()
    if not sep or not body.strip():
        raise ProbeSpecError(f"Malformed probe {text!r}", spec=text)

    try:
        if kind == ProbeKind.FOCK.value:
            try:
                m = int(body)
            except ValueError:
                raise ProbeSpecError(f"Fock number must be an integer in {text!r}", spec=text)
            if m < 0:
                raise ProbeSpecError(f"Fock number must be nonnegative in {text!r}", spec=text)
            return ProbeStateSpec(kind=ProbeKind.FOCK, cutoff=cutoff, fock_number=m, label=spec)

        if kind == ProbeKind.COHERENT.value:
            parts = body.split(",")
            if len(parts) == 1:
                amplitude = _parse_complex(parts[0], text)
            elif len(parts) == 2:
                amplitude = complex(_parse_complex(parts[0], text).real, _parse_complex(parts[1], text).real)
            else:
                raise ProbeSpecError(f"Coherent probe takes <re>[,<im>], got {text!r}", spec=text)
            return ProbeStateSpec(kind=ProbeKind.COHERENT, cutoff=cutoff, amplitude=amplitude, label=spec)

        if kind == ProbeKind.PHASE_SQUEEZED.value:
            parts = body.split(",")
            if len(parts) != 2:
                raise ProbeSpecError(f"Squeezed probe takes <eps>,<alpha>, got {text!r}", spec=text)
            return ProbeStateSpec(
                kind=ProbeKind.PHASE_SQUEEZED, cutoff=cutoff,
                squeezing=_parse_complex(parts[0], text), amplitude=_parse_complex(parts[1], text), label=spec,
            )

        if kind == ProbeKind.CUSTOM.value:
            if not body.startswith("@") or len(body) < 2:
                raise ProbeSpecError(f"Custom probe takes @<file>, got {text!r}", spec=text)
            path = Path(body[1:])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            coefficients = _read_custom_coefficients(path, text)
            return ProbeStateSpec(kind=ProbeKind.CUSTOM, cutoff=cutoff,
                                  coefficients=tuple(complex(c) for c in coefficients), label=spec)
    except ValidationError as e:
        raise ProbeSpecError(f"Invalid probe {text!r}: {e.message}", spec=text)

    raise ProbeSpecError(f"Unknown probe kind {kind!r}", spec=text)
