"""
sentigan-forecast: previsão diária de ações com ARIMA, LSTM e GAN condicionada a sentimento.
"""
__version__ = "0.1.0"
