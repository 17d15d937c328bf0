"""Prime enumeration, Mertens-type sums, and the log-integral reference."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eulertails.constants import EULER_GAMMA
from eulertails.errors import DomainError
from eulertails.primes import (
    mertens_log_sum,
    pnt_pi_reference,
    primes_for,
    primes_up_to,
)

# pi(x) checkpoints, independently known prime counts
PI_TABLE = {10: 4, 100: 25, 1000: 168, 10_000: 1229, 100_000: 9592, 1_000_000: 78_498}


class TestSieve:
    def test_small_tables(self):
        assert primes_up_to(10).tolist() == [2, 3, 5, 7]
        assert primes_up_to(2).tolist() == [2]
        assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    def test_counts_at_checkpoints(self):
        for x, count in PI_TABLE.items():
            assert primes_up_to(x).size == count, f"pi({x})"

    def test_limit_below_two_raises(self):
        with pytest.raises(DomainError):
            primes_up_to(1)

    def test_segment_boundaries(self):
        # limits straddling the internal segment size must agree with a
        # reference sieve over the straddled range
        seg = 1 << 18
        table = primes_up_to(seg + 1000)
        window = table[(table > seg - 1000)]
        small = primes_up_to(1024)
        for q in window:
            assert all(q % p for p in small[small * small <= q]), f"{q} composite"

    def test_monotone_in_limit(self):
        sizes = [primes_up_to(x).size for x in (100, 500, 1000, 5000)]
        assert sizes == sorted(sizes)

    @given(st.integers(min_value=2, max_value=3000))
    @settings(max_examples=60, deadline=None)
    def test_members_prime_and_complete(self, limit):
        table = primes_up_to(limit)
        assert table[-1] <= limit
        setified = set(table.tolist())
        for m in range(2, limit + 1):
            is_prime = all(m % d for d in range(2, int(math.isqrt(m)) + 1))
            assert (m in setified) == is_prime

    def test_primes_for_floors_float_limit(self):
        assert primes_for(10.9).tolist() == [2, 3, 5, 7]
        assert np.array_equal(primes_for(50.0), primes_up_to(50))


class TestMertens:
    def test_single_term(self):
        assert mertens_log_sum(2.0).value == pytest.approx(math.log(2), abs=1e-15)

    def test_two_terms(self):
        expect = math.log(2) + math.log(1.5)
        assert mertens_log_sum(3.0).value == pytest.approx(expect, abs=1e-15)

    def test_reference_tracking(self):
        for x in (1e3, 1e4, 1e5, 1e6):
            res = mertens_log_sum(x)
            assert res.reference == pytest.approx(
                math.log(math.log(x)) + EULER_GAMMA, abs=1e-12
            )
            assert abs(res.deviation) < 0.05
            assert not res.flagged

    def test_close_to_reference_at_1e5(self):
        res = mertens_log_sum(1e5)
        assert abs(res.value - res.reference) < 0.01

    def test_domain(self):
        with pytest.raises(DomainError):
            mertens_log_sum(1.5)


class TestLogIntegral:
    def test_empty_integral(self):
        assert pnt_pi_reference(2.0) == pytest.approx(0.0, abs=1e-13)

    def test_value_at_100(self):
        # independent quadrature of integral_2^100 dv/log v
        from eulertails.quadrature import gauss_legendre

        direct = gauss_legendre(lambda v: 1.0 / np.log(v), 2.0, 100.0, nodes=128)
        assert pnt_pi_reference(100.0) == pytest.approx(direct, rel=1e-10)
        assert pnt_pi_reference(100.0) == pytest.approx(29.081, abs=5e-3)

    def test_tracks_prime_count_at_1e6(self):
        assert abs(pnt_pi_reference(1e6) - 78_498) < 200

    def test_domain(self):
        with pytest.raises(DomainError):
            pnt_pi_reference(1.0)
