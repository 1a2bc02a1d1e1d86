"""
Modelos de previsão: ARIMA, LSTM e GAN condicional.
"""
from .forecast import ForecastRow
from .stationarity import AdfResult, adf_stationarity_test
from .arima import ArimaModel, ArimaOrder, select_order, rolling_forecast
from .lstm import LstmModel, TrainSchedule, cell_forward, predict
from .gan import Generator, Discriminator, GanSchedule, generator_forward, discriminator_forward, train_step
from .registry import ModelArtifact, asset_seed, train_model, forecast

__all__ = [
    'ForecastRow',
    'AdfResult', 'adf_stationarity_test',
    'ArimaModel', 'ArimaOrder', 'select_order', 'rolling_forecast',
    'LstmModel', 'TrainSchedule', 'cell_forward', 'predict',
    'Generator', 'Discriminator', 'GanSchedule', 'generator_forward', 'discriminator_forward', 'train_step',
    'ModelArtifact', 'asset_seed', 'train_model', 'forecast',
]
