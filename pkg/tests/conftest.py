from fractions import Fraction

from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

small = st.integers(-4, 4).map(Fraction) | st.fractions(min_value=-2, max_value=2, max_denominator=4)


def pieces(k, min_size=1, max_size=4):
    return st.lists(st.tuples(*[small] * k), min_size=min_size, max_size=max_size)


def spanning_pieces(k, max_size=4):
    """Piece lists whose rows span R^k (so the induced norm is a genuine norm)."""
    from oracles import rank
    return pieces(k, k, max_size).filter(lambda ps: rank(ps) == k)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
