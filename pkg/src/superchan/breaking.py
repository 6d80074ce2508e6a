"""Detection and generation of correlation- and causality-breaking processes.

Separability is certified through positivity under partial transposition
(PPT).  A negative partial transpose always soundly proves entanglement; a
positive one proves separability only when the product of the cut-local
dimensions is at most 6, and every verdict carries that exactness note.

Two canonical cuts classify a superchannel's Choi operator:

* Type-I:  separable across A1 B2 | B1 A2 (also the common-cause-breaking
  condition for causal maps);
* Type-II: separable across A1 A2 | B1 B2 (the multi-round,
  memory-verification notion).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    GenerationFailed,
    IncompleteDecomposition,
    NotAValidSuperchannel,
    NotHermitian,
)
from .channels import ChoiRep, random_density_matrix, validate_channel
from .operators import (
    DEFAULT_ATOL,
    LabeledOperator,
    SystemList,
    gamma,
    identity_operator,
    kron,
    partial_transpose,
    permute_systems,
)
from .superchannels import (
    CHOI_ORDER,
    SuperchannelChoi,
    SuperchannelDims,
    validate_superchannel,
)

TYPE_I_CUT = (("A1", "B2"), ("B1", "A2"))
TYPE_II_CUT = (("A1", "A2"), ("B1", "B2"))


@dataclass(frozen=True)
class Bipartition:
    left: tuple
    right: tuple

    def validate_against(self, op: LabeledOperator):
        labels = set(op.in_systems.labels)
        if set(self.left) & set(self.right):
            raise DimensionMismatch("bipartition sides overlap")
        if set(self.left) | set(self.right) != labels:
            raise DimensionMismatch(
                f"bipartition {self.left}|{self.right} does not cover {labels}"
            )


@dataclass(frozen=True)
class PptVerdict:
    bipartition: Bipartition
    min_eigenvalue: float
    is_ppt: bool
    tol: float


@dataclass(frozen=True)
class SeparableDecomposition:
    """Terms (X_i, Y_i) with the target equal to sum_i X_i ⊗ Y_i."""

    terms: tuple


@dataclass(frozen=True)
class MeasurePrepare:
    """POVM on the measured side paired with prepared states on the other."""

    povm: tuple
    states: tuple

    def __post_init__(self):
        if len(self.povm) != len(self.states):
            raise DimensionMismatch("POVM and state lists differ in length")


@dataclass(frozen=True)
class EbChannelReport:
    """Entanglement-breaking verdict for a channel.

    ``is_eb`` is None when the PPT surrogate cannot decide (positive partial
    transpose on a cut larger than 2x3).
    """

    ppt: PptVerdict
    is_eb: bool | None
    exactness: str  # "ppt-decisive" | "ppt-necessary-only"


@dataclass(frozen=True)
class BreakingReport:
    type_I: PptVerdict
    type_I_exactness: str
    type_II: PptVerdict
    type_II_exactness: str
    common_cause_breaking: bool  # mirrors the Type-I verdict


# ----------------------------------------------------------------------
# PPT machinery
# ----------------------------------------------------------------------

def _cut_exactness(op: LabeledOperator, cut: Bipartition) -> str:
    d_left = int(np.prod([op.in_systems.dim_of(l) for l in cut.left]))
    d_right = int(np.prod([op.in_systems.dim_of(l) for l in cut.right]))
    return "ppt-decisive" if d_left * d_right <= 6 else "ppt-necessary-only"


def ppt_test(op: LabeledOperator, cut: Bipartition,
             tol: float = DEFAULT_ATOL) -> PptVerdict:
    """Partial transpose over the right side of the cut; report the minimum
    eigenvalue.  Requires a Hermitian operator, square on every label."""
    cut.validate_against(op)
    m = op.matrix
    if np.linalg.norm(m - m.conj().T) > tol * max(1.0, np.linalg.norm(m)):
        raise NotHermitian("PPT test needs a Hermitian operator")
    pt = partial_transpose(op, cut.right)
    min_eig = float(np.min(np.linalg.eigvalsh(pt.matrix)))
    return PptVerdict(
        bipartition=cut,
        min_eigenvalue=min_eig,
        is_ppt=bool(min_eig >= -tol),
        tol=tol,
    )


def ppt_battery(op: LabeledOperator, tol: float = DEFAULT_ATOL) -> tuple:
    """PPT verdicts across every nontrivial bipartition of the systems.

    All verdicts positive is a necessary (not sufficient) condition for full
    separability, which is what a completely-breaking process must produce;
    any negative verdict conclusively rules it out.
    """
    labels = op.in_systems.labels
    if len(labels) < 2:
        raise DimensionMismatch("need at least two systems to bipartition")
    first, rest = labels[0], labels[1:]
    verdicts = []
    for mask in range(2 ** len(rest)):
        left = (first,) + tuple(
            l for i, l in enumerate(rest) if mask & (1 << i)
        )
        right = tuple(l for l in rest if l not in left)
        if not right:
            continue
        verdicts.append(ppt_test(op, Bipartition(left, right), tol))
    return tuple(verdicts)


def eb_channel_report(c: ChoiRep, tol: float = DEFAULT_ATOL) -> EbChannelReport:
    """Entanglement-breaking verdict from the Choi operator's input|output cut.

    A negative partial transpose rules the channel entangling definitively;
    a positive one is definitive only when d_in * d_out <= 6.
    """
    if not validate_channel(c, tol).valid:
        raise NotAValidSuperchannel("EB verdicts need a valid channel")
    cut = Bipartition(tuple(c.input_labels), tuple(c.output_labels))
    verdict = ppt_test(c.op, cut, tol)
    exactness = _cut_exactness(c.op, cut)
    if not verdict.is_ppt:
        is_eb = False
    elif exactness == "ppt-decisive":
        is_eb = True
    else:
        is_eb = None
    return EbChannelReport(ppt=verdict, is_eb=is_eb, exactness=exactness)


def superchannel_breaking_report(theta: SuperchannelChoi,
                                 tol: float = DEFAULT_ATOL) -> BreakingReport:
    """PPT verdicts on the two canonical cuts of a superchannel Choi operator."""
    if not validate_superchannel(theta, tol=tol).valid:
        raise NotAValidSuperchannel("breaking report needs a valid superchannel")
    cut1 = Bipartition(*TYPE_I_CUT)
    cut2 = Bipartition(*TYPE_II_CUT)
    v1 = ppt_test(theta.op, cut1, tol)
    v2 = ppt_test(theta.op, cut2, tol)
    return BreakingReport(
        type_I=v1,
        type_I_exactness=_cut_exactness(theta.op, cut1),
        type_II=v2,
        type_II_exactness=_cut_exactness(theta.op, cut2),
        common_cause_breaking=v1.is_ppt,
    )


# ----------------------------------------------------------------------
# measure-and-prepare form
# ----------------------------------------------------------------------

def measure_prepare_from_decomposition(
    d: SeparableDecomposition, tol: float = DEFAULT_ATOL
) -> MeasurePrepare:
    """Normalize separable terms into a POVM and prepared states.

    Each term contributes the effect Tr[Y_i] X_i and the state Y_i / Tr[Y_i];
    terms with negligible weight are dropped.  Raises
    ``IncompleteDecomposition`` when the effects do not sum to the identity.
    """
    povm, states = [], []
    for x, y in d.terms:
        weight = y.trace().real
        if weight <= tol:
            continue
        povm.append(weight * x)
        states.append(y * (1.0 / weight))
    if not povm:
        raise IncompleteDecomposition("no terms with positive weight")
    total = sum(m.matrix for m in povm)
    dev = float(np.linalg.norm(total - np.eye(total.shape[0])))
    if dev > max(tol, 1e-10) * max(1.0, np.linalg.norm(total)):
        raise IncompleteDecomposition(
            f"POVM completeness deviation {dev:.3e}"
        )
    return MeasurePrepare(povm=tuple(povm), states=tuple(states))


def choi_from_measure_prepare(mp: MeasurePrepare) -> LabeledOperator:
    """Assemble sum_i M_i ⊗ sigma_i (separable across the two sides)."""
    terms = [kron(m, s) for m, s in zip(mp.povm, mp.states)]
    total = terms[0]
    for t in terms[1:]:
        total = total + t
    return total


def apply_measure_prepare(mp: MeasurePrepare, rho: np.ndarray) -> np.ndarray:
    """Channel action sum_i Tr[M_i^T rho] sigma_i."""
    out = np.zeros_like(mp.states[0].matrix)
    for m, s in zip(mp.povm, mp.states):
        out = out + np.trace(m.matrix.T @ np.asarray(rho)) * s.matrix
    return out


# ----------------------------------------------------------------------
# constructions
# ----------------------------------------------------------------------

def depolarizing_channel(p: float) -> ChoiRep:
    """Qubit depolarizing family: Choi = (1-p) Gamma + (p/2) identity.

    Trace-preserving for every p in [0, 1]; the partially transposed Choi
    has minimum eigenvalue 3p/2 - 1, so the entanglement-breaking boundary
    sits at p = 2/3.
    """
    if not 0.0 <= p <= 1.0:
        raise DimensionMismatch(f"p must lie in [0, 1], got {p}")
    g = gamma(2).matrix
    j = (1.0 - p) * (g @ g.conj().T) + (p / 2.0) * np.eye(4)
    systems = SystemList([("A", 2), ("B", 2)])
    return ChoiRep(LabeledOperator(j, systems, systems), ("A",), ("B",))


def example_type1_not_type2(d: int = 2, omega: np.ndarray | None = None,
                            tol: float = DEFAULT_ATOL) -> SuperchannelChoi:
    """Superchannel that is Type-I separable yet Type-II entangling.

    It relays the early input straight to the late output, emits a fixed
    state omega at the early output, and discards the late input:
    J = Gamma_{A1 B2} ⊗ 1_{A2} ⊗ omega_{B1}.  The relay keeps perfect
    correlations with a reference alive across the two rounds, so the
    Type-II cut is negative while the Type-I cut is a product.
    """
    if omega is None:
        omega = np.zeros((d, d), dtype=complex)
        omega[0, 0] = 1.0
    omega = np.asarray(omega, dtype=complex)
    if omega.shape != (d, d):
        raise DimensionMismatch(f"omega must be {d}x{d}")
    if (
        abs(np.trace(omega) - 1.0) > tol
        or np.min(np.linalg.eigvalsh((omega + omega.conj().T) / 2)) < -tol
        or np.linalg.norm(omega - omega.conj().T) > tol
    ):
        raise NotAValidSuperchannel("omega is not a quantum state")
    g = gamma(d, labels=("A1", "B2")).matrix
    relay = LabeledOperator(
        g @ g.conj().T,
        [("A1", d), ("B2", d)],
        [("A1", d), ("B2", d)],
    )
    body = kron(
        kron(relay, identity_operator([("A2", d)])),
        LabeledOperator(omega, [("B1", d)], [("B1", d)]),
    )
    op = permute_systems(body, CHOI_ORDER, CHOI_ORDER)
    return SuperchannelChoi(op)


def _draw_eb_measure_prepare(dims: SuperchannelDims, n_terms: int,
                             rng: np.random.Generator) -> MeasurePrepare:
    effects = []
    for _ in range(n_terms):
        g = rng.standard_normal((dims.a1, dims.a1)) + 1j * rng.standard_normal(
            (dims.a1, dims.a1)
        )
        effects.append(g @ g.conj().T)
    inv_sqrt = np.linalg.inv(_sqrtm_psd(sum(effects)))
    povm, states = [], []
    for g in effects:
        e = inv_sqrt @ g @ inv_sqrt
        povm.append(
            kron(
                LabeledOperator(e, [("A1", dims.a1)], [("A1", dims.a1)]),
                identity_operator([("A2", dims.a2)]),
            )
        )
        st = random_density_matrix(dims.b1 * dims.b2, seed=rng)
        states.append(
            LabeledOperator(
                st,
                [("B1", dims.b1), ("B2", dims.b2)],
                [("B1", dims.b1), ("B2", dims.b2)],
            )
        )
    return MeasurePrepare(povm=tuple(povm), states=tuple(states))


def random_eb_measure_prepare(dims: SuperchannelDims, n_terms: int,
                              seed) -> MeasurePrepare:
    """Measure-and-prepare data behind :func:`random_eb_superchannel`.

    The POVM measures A1 (padded with the identity on A2, which keeps the
    no-signaling marginal exact) and each outcome prepares a random joint
    state on B1 B2.  Deterministic per seed.
    """
    if n_terms < 1:
        raise DimensionMismatch(f"n_terms must be >= 1, got {n_terms}")
    return _draw_eb_measure_prepare(dims, n_terms, np.random.default_rng(seed))


def random_eb_superchannel(dims: SuperchannelDims, n_terms: int, seed,
                           max_retries: int = 5) -> SuperchannelChoi:
    """Random Type-II separable superchannel, deterministic per seed.

    Assembled from :func:`random_eb_measure_prepare` terms; every sample is
    validated and resampled up to ``max_retries`` times before giving up.
    """
    if n_terms < 1:
        raise DimensionMismatch(f"n_terms must be >= 1, got {n_terms}")
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        mp = _draw_eb_measure_prepare(dims, n_terms, rng)
        op = choi_from_measure_prepare(mp)
        candidate = SuperchannelChoi(permute_systems(op, CHOI_ORDER, CHOI_ORDER))
        if validate_superchannel(candidate).valid:
            return candidate
    raise GenerationFailed(
        f"no valid sample after {max_retries} attempts (seed {seed})"
    )


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T
