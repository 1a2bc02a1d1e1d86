"""
Ingestão, validação, alinhamento, janelas e partições temporais.
"""
from .ohlcv import Bar, Series, RepairEntry, load_ohlcv, dump_ohlcv, repair_missing
from .validator import BarValidator
from .align import AlignedDataset, align, dump_aligned, load_aligned
from .windows import WindowSample, SplitSpec, make_windows, split, check_causality

__all__ = [
    'Bar', 'Series', 'RepairEntry', 'load_ohlcv', 'dump_ohlcv', 'repair_missing',
    'BarValidator',
    'AlignedDataset', 'align', 'dump_aligned', 'load_aligned',
    'WindowSample', 'SplitSpec', 'make_windows', 'split', 'check_causality',
]
