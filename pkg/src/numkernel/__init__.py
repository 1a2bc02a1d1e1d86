"""
Núcleo numérico: camadas densas, retropropagação, Adam, escalonadores e
verificação de gradientes.
"""
from .layers import DenseLayer, Network, Gradients, dense_forward, backward
from .optim import AdamState, adam_step, levenberg_marquardt
from .scaling import ScalerParams, scaler_fit, scaler_transform, scaler_inverse
from .gradcheck import GradCheckReport, finite_difference_check

__all__ = [
    'DenseLayer', 'Network', 'Gradients', 'dense_forward', 'backward',
    'AdamState', 'adam_step', 'levenberg_marquardt',
    'ScalerParams', 'scaler_fit', 'scaler_transform', 'scaler_inverse',
    'GradCheckReport', 'finite_difference_check',
]
