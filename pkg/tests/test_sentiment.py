"""
Testes do motor de sentimento: léxico, regras de escore e agregação diária.
"""
import io
from datetime import date, datetime, timedelta

import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.errors import DataError
from src.sentiment.daily import SentimentRecord, aggregate_daily, daily_to_frame, load_daily, load_tweets
from src.sentiment.lexicon import load_lexicon, load_rules
from src.sentiment.vader import clean_text, normalize, punctuation_emphasis, score_text, strip_noise


@pytest.fixture
def lexicon(fixtures_dir):
    return load_lexicon(fixtures_dir / "lexicon_sample.txt")


def test_load_lexicon_counts_malformed_and_duplicates(lexicon):
    """Testa que linhas ruins são contadas e a última valência repetida vale."""
    assert lexicon.malformed_lines == 2
    assert lexicon.duplicate_tokens == 1
    assert lexicon.valence("good") == 1.9
    assert len(lexicon) == 26


def test_load_lexicon_lowercases_tokens():
    """Testa que os tokens do léxico ficam em minúsculas."""
    lex = load_lexicon(["Great\t3.1\t0.5\t[]"])
    assert "great" in lex
    assert "Great" not in lex


def test_load_lexicon_empty_is_error():
    """Testa que léxico sem entradas válidas é erro de dados."""
    with pytest.raises(DataError):
        load_lexicon(io.StringIO("sem tabulação\n\n"))


def test_rules_load_canonical_constants():
    """Testa as constantes carregadas do YAML de regras."""
    rules = load_rules()
    assert rules.constants.negation_scalar == -0.74
    assert rules.boosters["extremely"] == pytest.approx(0.293)
    assert rules.boosters["slightly"] == pytest.approx(-0.293)
    assert "not" in rules.negations


def test_no_lexicon_word_scores_zero(lexicon):
    """Testa que texto sem palavras do léxico dá exatamente 0."""
    assert score_text(lexicon, "earnings call tomorrow!!!") == 0.0
    assert score_text(lexicon, "") == 0.0


def test_single_word_normalization(lexicon):
    """Testa o valor de uma palavra isolada: 1.9 / sqrt(1.9² + 15)."""
    assert score_text(lexicon, "good") == pytest.approx(0.44043, abs=1e-4)
    assert normalize(1.9) == pytest.approx(0.44043, abs=1e-4)


def test_negation_flips_sign(lexicon):
    """Testa 'not good' = normalize(-0.74 * 1.9)."""
    assert score_text(lexicon, "not good") == pytest.approx(-0.34124, abs=1e-4)
    assert score_text(lexicon, "isn't great") < 0


def test_booster_and_caps_increase_intensity(lexicon):
    """Testa que boosters e maiúsculas aumentam a magnitude."""
    base = score_text(lexicon, "good results today")
    assert score_text(lexicon, "very good results today") > base
    assert score_text(lexicon, "GOOD results today") > base
    assert score_text(lexicon, "slightly good results today") < base


def test_but_shifts_weight_to_second_clause(lexicon):
    """Testa que 'but' pondera 0.5 antes e 1.5 depois."""
    expected = normalize(0.5 * 2.3 + 1.5 * -1.9)
    assert score_text(lexicon, "strong demand but weak margins") == pytest.approx(expected)


def test_exclamations_are_capped(lexicon):
    """Testa o limite de três '!' na ênfase."""
    assert score_text(lexicon, "good!!!!!") == score_text(lexicon, "good!!!")
    assert score_text(lexicon, "good!!") > score_text(lexicon, "good!")
    assert punctuation_emphasis("good!!!!!", lexicon) == pytest.approx(3 * 0.292)


def test_question_marks(lexicon):
    """Testa a ênfase de '??' e o teto com mais de três."""
    assert punctuation_emphasis("good??", lexicon) == pytest.approx(0.36)
    assert punctuation_emphasis("good????", lexicon) == pytest.approx(0.96)
    assert punctuation_emphasis("good?", lexicon) == 0.0


def test_noise_is_removed_before_scoring(lexicon):
    """Testa que URLs, @usuários e $tickers não afetam o escore."""
    noisy = "@trader good news $AAPL https://example.com/x"
    assert strip_noise(noisy) == "good news"
    assert score_text(lexicon, noisy) == score_text(lexicon, "good news")


def test_clean_text_keeps_case_and_punctuation_runs():
    """Testa a tokenização: caixa preservada e '!!' como um token."""
    assert clean_text("GREAT call!! see www.x.com") == ["GREAT", "call", "!!", "see"]


@settings(max_examples=200, deadline=None)
@given(text=st.text(max_size=200))
def test_score_always_in_range(text):
    """Propriedade: o escore composto fica em [-1, 1] para qualquer texto."""
    lex = load_lexicon(["good\t1.9", "bad\t-2.5", "no\t-1.2"])
    assert -1.0 <= score_text(lex, text) <= 1.0


@settings(max_examples=100, deadline=None)
@given(words=st.lists(st.sampled_from(["good", "great", "love", "best", "nice"]), min_size=1, max_size=8))
def test_positive_words_only_is_positive(words):
    """Propriedade: só palavras positivas, sem negação, dá escore positivo."""
    lex = load_lexicon(["good\t1.9", "great\t3.1", "love\t3.2", "best\t3.2", "nice\t1.8"])
    assert score_text(lex, " ".join(words)) > 0


def test_golden_corpus_compounds(lexicon, fixtures_dir):
    """Testa os 50 posts do corpus contra os compostos de referência gravados no fixture."""
    golden = pd.read_csv(fixtures_dir / "golden_compounds.csv", keep_default_na=False)
    posts = (fixtures_dir / "golden_corpus.txt").read_text(encoding="utf-8").splitlines()
    assert golden["text"].tolist() == posts
    for post, expected in zip(golden["text"], golden["compound"]):
        assert score_text(lexicon, post) == pytest.approx(expected, abs=1e-4), post


def test_matches_reference_vader_on_golden_corpus(lexicon, fixtures_dir):
    """Testa o corpus contra o pacote vaderSentiment, quando instalado."""
    vader = pytest.importorskip("vaderSentiment.vaderSentiment")
    analyzer = vader.SentimentIntensityAnalyzer()
    analyzer.lexicon = dict(lexicon.entries)
    posts = (fixtures_dir / "golden_corpus.txt").read_text(encoding="utf-8").splitlines()
    assert len(posts) == 50
    for post in posts:
        expected = analyzer.polarity_scores(post)["compound"]
        assert score_text(lexicon, post) == pytest.approx(expected, abs=1e-4), post


def _record(day, compound, hour=12):
    return SentimentRecord(datetime(day.year, day.month, day.day, hour), "x", compound)


def test_aggregate_daily_mean_and_zero_fill():
    """Testa média por pregão e neutro nos pregões sem posts."""
    days = [date(2024, 1, 2), date(2024, 1, 3), date(2024, 1, 4)]
    records = [_record(days[0], 0.4), _record(days[0], -0.2), _record(days[2], 0.9)]
    daily = aggregate_daily(records, days)
    assert [d.compound for d in daily] == pytest.approx([0.1, 0.0, 0.9])
    assert [d.sample_count for d in daily] == [2, 0, 1]


def test_aggregate_daily_rolls_weekend_forward():
    """Testa que posts do fim de semana contam para a segunda-feira."""
    days = [date(2024, 1, 5), date(2024, 1, 8)]
    records = [_record(date(2024, 1, 6), 0.5), _record(date(2024, 1, 7), -0.1)]
    daily = aggregate_daily(records, days)
    assert daily[0].sample_count == 0
    assert daily[1].sample_count == 2
    assert daily[1].compound == pytest.approx(0.2)


def test_aggregate_daily_drops_posts_after_last_day():
    """Testa o descarte de posts depois do último pregão."""
    days = [date(2024, 1, 2)]
    daily = aggregate_daily([_record(date(2024, 1, 3), 0.7)], days)
    assert daily[0].sample_count == 0 and daily[0].compound == 0.0


@settings(max_examples=200, deadline=None)
@given(offsets=st.sets(st.integers(min_value=0, max_value=60), min_size=1, max_size=30),
       posts=st.lists(st.tuples(st.integers(min_value=-5, max_value=70), st.integers(min_value=0, max_value=23),
                                st.floats(min_value=-1.0, max_value=1.0)), max_size=80))
def test_aggregate_daily_conserves_posts(offsets, posts):
    """Propriedade: a soma das contagens é o número de posts até o último pregão."""
    start = date(2024, 1, 1)
    days = [start + timedelta(days=k) for k in sorted(offsets)]
    records = [SentimentRecord(datetime(2024, 1, 1, hour) + timedelta(days=k), "x", c) for k, hour, c in posts]
    daily = aggregate_daily(records, days)
    assert [d.date for d in daily] == days
    assert sum(d.sample_count for d in daily) == sum(1 for r in records if r.day <= days[-1])
    assert all(-1.0 <= d.compound <= 1.0 for d in daily)


def test_aggregate_daily_rejects_unsorted_days():
    """Testa erro com pregões fora de ordem."""
    with pytest.raises(DataError):
        aggregate_daily([], [date(2024, 1, 3), date(2024, 1, 2)])


def test_record_rejects_out_of_range_compound():
    """Testa a validação do escore composto."""
    with pytest.raises(DataError):
        SentimentRecord(datetime(2024, 1, 2), "x", 1.5)


def test_load_tweets_with_quoted_commas(tmp_path, lexicon):
    """Testa CSV com textos entre aspas contendo vírgulas."""
    path = tmp_path / "tweets.csv"
    path.write_text('timestamp,text\n2024-01-02T10:00:00,"good, strong quarter"\n'
                    '2024-01-03T09:30:00,watching the chart\n', encoding="utf-8")
    records = load_tweets(path, lexicon)
    assert len(records) == 2
    assert records[0].raw_text == "good, strong quarter"
    assert records[0].compound > 0
    assert records[1].compound == 0.0


def test_load_tweets_bad_timestamp_reports_line(tmp_path, lexicon):
    """Testa que timestamp inválido indica a linha do arquivo."""
    path = tmp_path / "tweets.csv"
    path.write_text("timestamp,text\n2024-01-02T10:00:00,good\nontem,bad\n", encoding="utf-8")
    with pytest.raises(DataError) as excinfo:
        load_tweets(path, lexicon)
    assert excinfo.value.line == 3


def test_load_tweets_missing_column(tmp_path, lexicon):
    """Testa cabeçalho sem a coluna de texto."""
    path = tmp_path / "tweets.csv"
    path.write_text("timestamp,body\n2024-01-02T10:00:00,good\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_tweets(path, lexicon)


def test_daily_frame_roundtrip(tmp_path):
    """Testa gravar e reler o sentimento diário."""
    days = [date(2024, 1, 2), date(2024, 1, 3)]
    daily = aggregate_daily([_record(days[0], 0.123456789)], days)
    path = tmp_path / "daily.csv"
    daily_to_frame(daily).to_csv(path, index=False)
    assert load_daily(path) == daily
