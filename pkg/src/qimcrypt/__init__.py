"""Quantum image encryption toolkit: NEQR encoding, logistic-map diffusion,
affine position scrambling, circuit compression and noise analysis."""
from .cipher import EncryptionKey, InvalidKeyError, Keystream, decrypt, encrypt, logistic_keystream
from .kernels import BACKEND
from .qcircuit import Circuit, Gate
from .qimage import GrayImage, ImageSizeError, build_naive_neqr_circuit, neqr_state, reconstruct_image
from .qsim import DensityMatrix, NoiseSpec, StateVector, run_statevector
from .synth import factor_shared_controls, minimize_cover, synthesize_minimized_encoder

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Circuit",
    "DensityMatrix",
    "EncryptionKey",
    "Gate",
    "GrayImage",
    "ImageSizeError",
    "InvalidKeyError",
    "Keystream",
    "NoiseSpec",
    "StateVector",
    "build_naive_neqr_circuit",
    "decrypt",
    "encrypt",
    "factor_shared_controls",
    "logistic_keystream",
    "minimize_cover",
    "neqr_state",
    "reconstruct_image",
    "run_statevector",
    "synthesize_minimized_encoder",
]
