"""Quantum GAN workbench: QLSTM patch generator, baselines, PCA study and Fréchet scoring."""
from .estimators import LSTMQGAN, PatchQGAN
from .pca import StandardizedPCA

__version__ = "0.1.0"

__all__ = ["LSTMQGAN", "PatchQGAN", "StandardizedPCA"]
