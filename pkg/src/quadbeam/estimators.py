"""scikit-learn style wrappers: positions in, field features out.

Rows of ``X`` are Cartesian points ``(X, Y, Z)`` in metres. The transformers
are stateless apart from the scale factors recorded by ``fit``, so they slot
into ``Pipeline``/``FunctionTransformer`` workflows for parameter sweeps.
"""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import constants as const
from .beams import evaluate_field, get_preset, rabi_scale
from .dynamics import DetuningSpec, trap_potential

FIELD_FEATURES = ("rabi_re", "rabi_im", "rabi_sq", "rabi_sq_rel", "phase",
                  "phase_grad_x", "phase_grad_y", "phase_grad_z",
                  "rabi_sq_grad_x", "rabi_sq_grad_y", "rabi_sq_grad_z")


class _BeamTransformer(TransformerMixin, BaseEstimator):

    def _resolve(self):
        preset = get_preset(self.preset)
        beam = self.beam if self.beam is not None else preset.beam("lg", l=1, p=0)
        atom = self.atom if self.atom is not None else preset.atom
        return preset, beam, atom

    def _validate(self, X, reset):
        X = check_array(X, dtype=np.float64, ensure_all_finite=True)
        if reset:
            self.n_features_in_ = X.shape[1]
        if X.shape[1] != 3:
            raise ValueError(f"X must have 3 columns (X, Y, Z), got {X.shape[1]}")
        if not reset:
            check_is_fitted(self, "scale_")
        return X


class QuadrupoleFieldTransformer(_BeamTransformer):
    """Map positions to quadrupole Rabi-frequency features.

    Parameters
    ----------
    beam : BeamSpec, optional
        Defaults to the preset's LG ``l=1, p=0`` mode.
    atom : AtomSpec, optional
        Defaults to the preset atom.
    features : sequence of str
        Columns to emit, from :data:`FIELD_FEATURES`.
    preset : str
        Preset supplying defaults.

    Attributes
    ----------
    scale_ : float
        ``Omega_0`` [1/s] used for ``rabi_sq_rel``.
    n_features_in_ : int
    """

    def __init__(self, beam=None, atom=None, features=("rabi_sq_rel",), preset="cs-6s-5d"):
        self.beam = beam
        self.atom = atom
        self.features = features
        self.preset = preset

    def fit(self, X, y=None):
        bad = [f for f in self.features if f not in FIELD_FEATURES]
        if bad:
            raise ValueError(f"unknown features {bad}; choose from {FIELD_FEATURES}")
        self._validate(X, reset=True)
        _, beam, atom = self._resolve()
        self.scale_ = rabi_scale(beam, atom)
        return self

    def transform(self, X):
        X = self._validate(X, reset=False)
        _, beam, atom = self._resolve()
        fa = evaluate_field(beam, atom, X)
        cols = {
            "rabi_re": np.real(fa.rabi), "rabi_im": np.imag(fa.rabi),
            "rabi_sq": fa.rabi_sq, "rabi_sq_rel": fa.rabi_sq / self.scale_ ** 2,
            "phase": fa.phase,
        }
        for i, ax in enumerate("xyz"):
            cols[f"phase_grad_{ax}"] = fa.phase_gradient[..., i]
            cols[f"rabi_sq_grad_{ax}"] = fa.rabi_sq_gradient[..., i]
        return np.column_stack([np.asarray(cols[f], float) for f in self.features])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.features, dtype=object)


class OpticalForceTransformer(_BeamTransformer):
    """Map positions to the force on an atom at rest and the trap potential.

    Output columns are ``force_x, force_y, force_z`` [N] and ``potential`` [J].
    ``delta0`` defaults to the preset detuning.
    """

    def __init__(self, beam=None, atom=None, delta0=None, preset="cs-6s-5d"):
        self.beam = beam
        self.atom = atom
        self.delta0 = delta0
        self.preset = preset

    def fit(self, X, y=None):
        self._validate(X, reset=True)
        preset, beam, atom = self._resolve()
        self.delta0_ = preset.delta0 if self.delta0 is None else float(self.delta0)
        self.scale_ = rabi_scale(beam, atom)
        return self

    def transform(self, X):
        X = self._validate(X, reset=False)
        _, beam, atom = self._resolve()
        fa = evaluate_field(beam, atom, X)
        d0 = self.delta0_
        den = d0 * d0 + 2.0 * fa.rabi_sq + atom.gamma_q ** 2
        phase_grad = np.where(np.isnan(fa.phase_gradient), 0.0, fa.phase_gradient)  # transverse part on the core
        force = (-const.hbar * d0 * fa.rabi_sq_gradient
                 + 2.0 * const.hbar * atom.gamma_q * fa.rabi_sq[..., None] * phase_grad) / den[..., None]
        u = trap_potential(atom, DetuningSpec(d0), fa.rabi_sq)
        return np.column_stack([force, u])

    def get_feature_names_out(self, input_features=None):
        return np.asarray(["force_x", "force_y", "force_z", "potential"], dtype=object)
