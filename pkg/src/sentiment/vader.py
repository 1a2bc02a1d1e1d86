"""
Motor de sentimento baseado em regras (estilo VADER).

Produz o escore composto em [-1, 1] de um texto curto. As regras seguem a
implementação canônica: valência do léxico, boosters dos três tokens
anteriores, negação, ênfase de maiúsculas, "but", pontuação e normalização
s / sqrt(s^2 + alpha). Expressões idiomáticas e emojis não são tratados.
"""
import math
import re
import string
from typing import List

from src.sentiment.lexicon import Lexicon

URL_PATTERN = re.compile(r'(?:https?://|www\.)\S+', re.IGNORECASE)
HANDLE_PATTERN = re.compile(r'(?<![\w@])@\w+')
CASHTAG_PATTERN = re.compile(r'(?<![\w$])\$[A-Za-z][A-Za-z0-9._]*')
TOKEN_PATTERN = re.compile(r"[\w']+|[!?]+")


def strip_noise(raw: str) -> str:
    """Remove URLs, @usuários e $tickers e normaliza os espaços."""
    if not raw:
        return ""
    text = URL_PATTERN.sub(' ', raw)
    text = HANDLE_PATTERN.sub(' ', text)
    text = CASHTAG_PATTERN.sub(' ', text)
    return re.sub(r'\s+', ' ', text).strip()


def clean_text(raw: str) -> List[str]:
    """
    Limpa o texto e devolve os tokens.

    Palavras mantêm a caixa original (maiúsculas são sinal de ênfase) e
    sequências de "!" ou "?" viram um token cada.

    Args:
        raw: Texto bruto do post

    Returns:
        Lista de tokens
    """
    return TOKEN_PATTERN.findall(strip_noise(raw))


def _strip_punctuation(token: str) -> str:
    stripped = token.strip(string.punctuation)
    if len(stripped) <= 2:
        return token
    return stripped


def _words(text: str) -> List[str]:
    return [_strip_punctuation(w) for w in text.split()]


def _is_cap_differential(words: List[str]) -> bool:
    caps = sum(1 for w in words if w.isupper())
    return 0 < len(words) - caps < len(words)


def normalize(score: float, alpha: float = 15.0) -> float:
    """Leva a soma de valências para [-1, 1]."""
    value = score / math.sqrt(score * score + alpha)
    return max(-1.0, min(1.0, value))


class _Scorer:
    """Aplica as regras a uma lista de palavras já separadas."""

    def __init__(self, lexicon: Lexicon, words: List[str]):
        self.lexicon = lexicon
        self.k = lexicon.constants
        self.words = words
        self.lower = [w.lower() for w in words]
        self.cap_diff = _is_cap_differential(words)

    def _negated(self, word: str) -> bool:
        return word in self.lexicon.negations or "n't" in word

    def _booster_scalar(self, i: int, valence: float) -> float:
        word = self.words[i]
        scalar = self.lexicon.boosters.get(self.lower[i], 0.0)
        if scalar == 0.0:
            return 0.0
        if valence < 0:
            scalar = -scalar
        if word.isupper() and self.cap_diff:
            scalar += self.k.caps_increment if valence > 0 else -self.k.caps_increment
        return scalar

    def _negation_check(self, valence: float, start: int, i: int) -> float:
        w = self.lower
        if start == 0:
            if self._negated(w[i - 1]):
                valence *= self.k.negation_scalar
        elif start == 1:
            if w[i - 2] == "never" and w[i - 1] in ("so", "this"):
                valence *= 1.25
            elif w[i - 2] == "without" and w[i - 1] == "doubt":
                pass
            elif self._negated(w[i - 2]):
                valence *= self.k.negation_scalar
        else:
            if w[i - 3] == "never" and (w[i - 2] in ("so", "this") or w[i - 1] in ("so", "this")):
                valence *= 1.25
            elif w[i - 3] == "without" and (w[i - 2] == "doubt" or w[i - 1] == "doubt"):
                pass
            elif self._negated(w[i - 3]):
                valence *= self.k.negation_scalar
        return valence

    def _phrase_booster(self, valence: float, i: int) -> float:
        # boosters de duas ou três palavras ("sort of", "just enough")
        w = self.lower
        phrases = [f"{w[i - 3]} {w[i - 2]} {w[i - 1]}", f"{w[i - 3]} {w[i - 2]}",
                   f"{w[i - 2]} {w[i - 1]}"]
        for phrase in phrases:
            if phrase in self.lexicon.boosters:
                valence += self.lexicon.boosters[phrase]
        return valence

    def _least_check(self, valence: float, i: int) -> float:
        w = self.lower
        if i > 1 and w[i - 1] not in self.lexicon and w[i - 1] == "least":
            if w[i - 2] not in ("at", "very"):
                valence *= self.k.negation_scalar
        elif i > 0 and w[i - 1] not in self.lexicon and w[i - 1] == "least":
            valence *= self.k.negation_scalar
        return valence

    def word_valence(self, i: int) -> float:
        item, low = self.words[i], self.lower[i]
        if low not in self.lexicon:
            return 0.0
        w = self.lower
        valence = self.lexicon.valence(low)

        if low == "no" and i != len(w) - 1 and w[i + 1] in self.lexicon:
            valence = 0.0
        if ((i > 0 and w[i - 1] == "no") or (i > 1 and w[i - 2] == "no")
                or (i > 2 and w[i - 3] == "no" and w[i - 1] in ("or", "nor"))):
            valence = self.lexicon.valence(low) * self.k.negation_scalar

        if item.isupper() and self.cap_diff:
            valence += self.k.caps_increment if valence > 0 else -self.k.caps_increment

        for start in range(3):
            j = i - (start + 1)
            if i > start and w[j] not in self.lexicon:
                s = self._booster_scalar(j, valence)
                if start == 1:
                    s *= 0.95
                elif start == 2:
                    s *= 0.9
                valence += s
                valence = self._negation_check(valence, start, i)
                if start == 2:
                    valence = self._phrase_booster(valence, i)

        return self._least_check(valence, i)

    def sentiments(self) -> List[float]:
        values = []
        for i, low in enumerate(self.lower):
            if low in self.lexicon.boosters:
                values.append(0.0)
            elif low == "kind" and i < len(self.lower) - 1 and self.lower[i + 1] == "of":
                values.append(0.0)
            else:
                values.append(self.word_valence(i))
        return self._but_check(values)

    def _but_check(self, values: List[float]) -> List[float]:
        if "but" not in self.lower:
            return values
        pivot = self.lower.index("but")
        return [v * self.k.but_before if idx < pivot
                else v * self.k.but_after if idx > pivot else v
                for idx, v in enumerate(values)]


def punctuation_emphasis(text: str, lexicon: Lexicon) -> float:
    """Ênfase somada pelos "!" (até o limite configurado) e por "??"."""
    k = lexicon.constants
    exclamations = min(text.count("!"), k.max_exclamations)
    amplifier = exclamations * k.exclamation_increment
    questions = text.count("?")
    if questions > 1:
        amplifier += questions * k.question_increment if questions <= 3 else k.question_cap
    return amplifier


def score_text(lexicon: Lexicon, raw: str) -> float:
    """
    Escore composto de um texto em [-1, 1].

    Tokens fora do léxico contribuem 0; texto sem nenhuma palavra do léxico
    dá exatamente 0.
    """
    text = strip_noise(raw)
    words = _words(text)
    if not words:
        return 0.0
    values = _Scorer(lexicon, words).sentiments()
    total = float(sum(values))
    emphasis = punctuation_emphasis(text, lexicon)
    if total > 0:
        total += emphasis
    elif total < 0:
        total -= emphasis
    else:
        return 0.0
    return normalize(total, lexicon.constants.normalization_alpha)
