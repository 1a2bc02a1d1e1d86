"""
Sentimento por regras: léxico, escore por texto e agregação por pregão.
"""
from .lexicon import Lexicon, load_lexicon, load_rules
from .vader import clean_text, score_text
from .daily import SentimentRecord, DailySentiment, aggregate_daily, load_tweets

__all__ = [
    'Lexicon', 'load_lexicon', 'load_rules',
    'clean_text', 'score_text',
    'SentimentRecord', 'DailySentiment', 'aggregate_daily', 'load_tweets',
]
