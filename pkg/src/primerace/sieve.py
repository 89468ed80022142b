"""Segmented prime sieve and residue-class counting functions.

census() streams an odd-only segmented sieve (wheel-30 presieve,
2^20 odd numbers per segment) and records, at each requested
checkpoint x, the exact prime counts pi(x, q, a) together with the
Chebyshev psi(x, q, a) and the prime-power count Pi(x, q, a) for every
residue a coprime to q.  Real accumulators use compensated summation
and segments merge in ascending order, so output is identical for any
worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .common import CapacityError, KahanSum, real12

SEGMENT_ODDS = 1 << 20          # odd numbers per segment
MAX_X = 10 ** 10                # census capacity
MAX_X_REFERENCE = 10 ** 8       # reference sieve capacity

# odd residues mod 30 coprime to 30 -> presieve survivor pattern of length 15
_WHEEL30 = np.array([r % 30 in (1, 7, 11, 13, 17, 19, 23, 29)
                     for r in range(1, 31, 2)], dtype=bool)


def simple_sieve(limit):
    """All primes <= limit by a plain strided boolean sieve."""
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    return np.flatnonzero(is_p).astype(np.int64)


def pi_reference(x):
    """pi(x) by an independent full (non-segmented, wheel-free) sieve.

    Marks every composite from p*p with stride p over the whole array;
    used as the cross-algorithm oracle, never in production paths.
    """
    x = int(x)
    if x > MAX_X_REFERENCE:
        raise CapacityError(f"pi_reference capacity is {MAX_X_REFERENCE}, got {x}")
    if x < 2:
        return 0
    is_p = np.ones(x + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(x) + 1):
        if is_p[p]:
            is_p[p * p::p] = False
    return int(np.count_nonzero(is_p))


def _sieve_segment_task(args):
    """Sieve one odd segment [low, high); returns the primes it contains."""
    low, high, base_odd = args
    n_odd = (high - low + 1) // 2
    mask = np.empty(n_odd, dtype=bool)
    # wheel-30 presieve: survivors of 3 and 5 marking, phase-aligned
    phase = ((low - 1) // 2) % 15
    reps = (n_odd + phase) // 15 + 1
    mask[:] = np.tile(_WHEEL30, reps)[phase:phase + n_odd]
    for p in base_odd:
        p = int(p)
        if p * p >= high:
            break
        if p in (3, 5):
            continue
        start = max(p * p, ((low + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start < high:
            mask[(start - low) // 2::p] = False
    # the wheel also cleared 3 and 5 themselves; restore them
    for p in (3, 5):
        if low <= p < high:
            mask[(p - low) // 2] = True
    return low + 2 * np.flatnonzero(mask).astype(np.int64)


def iter_primes(x_max, workers=1):
    """Stream all primes <= x_max as ascending numpy blocks."""
    x_max = int(x_max)
    if x_max > MAX_X:
        raise CapacityError(f"sieve capacity is {MAX_X}, got {x_max}")
    if x_max >= 2:
        yield np.array([2], dtype=np.int64)
    if x_max < 3:
        return
    base = simple_sieve(math.isqrt(x_max))
    base_odd = base[base > 2]
    span = 2 * SEGMENT_ODDS
    bounds = []
    low = 3
    while low <= x_max:
        high = min(low + span, x_max + 2)
        bounds.append((low, high, base_odd))
        low = high if high % 2 == 1 else high + 1
    if workers <= 1:
        for b in bounds:
            yield _sieve_segment_task(b)
    else:
        # segments are independent; results are consumed in ascending order
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for primes in pool.map(_sieve_segment_task, bounds, chunksize=1):
                yield primes


@dataclass
class ResidueCensus:
    """Checkpointed counting functions for residue classes mod q.

    pi[a], psi[a], Pi[a] are arrays over the checkpoint grid for every
    residue a coprime to q; pi_total/psi_total/Pi_total include all
    primes (also those dividing q).
    """

    q: int
    checkpoints: np.ndarray
    residues: list
    pi: dict
    psi: dict
    Pi: dict
    pi_total: np.ndarray
    psi_total: np.ndarray
    Pi_total: np.ndarray

    def _idx(self, x):
        i = int(np.searchsorted(self.checkpoints, x))
        if i == len(self.checkpoints) or self.checkpoints[i] != x:
            raise KeyError(f"{x} is not a checkpoint of this census")
        return i

    def pi_at(self, x, a=None):
        i = self._idx(x)
        return int(self.pi_total[i]) if a is None else int(self.pi[a % self.q][i])

    def psi_at(self, x, a=None):
        i = self._idx(x)
        return float(self.psi_total[i]) if a is None else float(self.psi[a % self.q][i])

    def Pi_at(self, x, a=None):
        i = self._idx(x)
        return float(self.Pi_total[i]) if a is None else float(self.Pi[a % self.q][i])

    def to_csv(self, path):
        """Rows x,a,pi,psi,Pi per (checkpoint, residue), 12 significant digits."""
        with open(path, "w") as fh:
            fh.write("x,a,pi,psi,Pi\n")
            for i, x in enumerate(self.checkpoints):
                for a in self.residues:
                    fh.write(f"{int(x)},{a},{int(self.pi[a][i])},"
                             f"{real12(self.psi[a][i])},{real12(self.Pi[a][i])}\n")


def load_census_csv(path):
    """Re-read a census CSV produced by ResidueCensus.to_csv.

    Returns (checkpoints, rows) with rows[(x, a)] = (pi, psi, Pi).
    """
    rows = {}
    xs = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,a,pi,psi,Pi":
            raise ValueError(f"unexpected census header: {header!r}")
        for line in fh:
            x, a, pi, psi, Pi = line.strip().split(",")
            key = (int(x), int(a))
            rows[key] = (int(pi), float(psi), float(Pi))
            if not xs or xs[-1] != int(x):
                xs.append(int(x))
    return xs, rows


def _prime_powers(x_max, base_primes):
    """All (n = p^k, p, k) with k >= 2 and n <= x_max, sorted by n."""
    out = []
    for p in base_primes:
        p = int(p)
        n = p * p
        k = 2
        while n <= x_max:
            out.append((n, p, k))
            n *= p
            k += 1
    out.sort()
    return out


def census(q, x_max, checkpoints, workers=1):
    """Exact pi/psi/Pi per residue class mod q at the given checkpoints."""
    if q < 3:
        raise ValueError(f"modulus must be >= 3, got {q}")
    x_max = int(x_max)
    if x_max > MAX_X:
        raise CapacityError(f"census capacity is {MAX_X}, got x_max={x_max}")
    ck = np.asarray(sorted(int(c) for c in checkpoints), dtype=np.int64)
    if ck.size == 0:
        raise ValueError("checkpoint list is empty")
    if ck[0] < 2 or ck[-1] > x_max:
        raise ValueError("checkpoints must lie in [2, x_max]")
    if len(set(ck.tolist())) != len(ck):
        raise ValueError("checkpoints must be strictly increasing")

    residues = [a for a in range(1, q) if math.gcd(a, q) == 1]
    nk = len(ck)
    pi_res = {a: np.zeros(nk, dtype=np.int64) for a in residues}
    psi_res = {a: np.zeros(nk, dtype=np.float64) for a in residues}
    pi_tot = np.zeros(nk, dtype=np.int64)
    psi_tot = np.zeros(nk, dtype=np.float64)

    run_pi = {a: 0 for a in residues}
    run_psi = {a: KahanSum() for a in residues}
    run_pi_tot = 0
    run_psi_tot = KahanSum()
    next_ck = 0

    scan_to = int(ck[-1])
    for block in iter_primes(scan_to, workers=workers):
        if block.size == 0:
            continue
        logs = np.log(block.astype(np.float64))
        res = block % q
        # resolve checkpoints that fall inside this block
        while next_ck < nk and ck[next_ck] <= block[-1]:
            x = ck[next_ck]
            idx = int(np.searchsorted(block, x, side="right"))
            cnt = np.bincount(res[:idx].astype(np.int64), minlength=q)
            wsum = np.bincount(res[:idx].astype(np.int64),
                               weights=logs[:idx], minlength=q)
            for a in residues:
                pi_res[a][next_ck] = run_pi[a] + int(cnt[a])
                psi_res[a][next_ck] = run_psi[a].value + float(wsum[a])
            pi_tot[next_ck] = run_pi_tot + idx
            psi_tot[next_ck] = run_psi_tot.value + float(np.sum(logs[:idx]))
            next_ck += 1
        cnt = np.bincount(res.astype(np.int64), minlength=q)
        wsum = np.bincount(res.astype(np.int64), weights=logs, minlength=q)
        for a in residues:
            run_pi[a] += int(cnt[a])
            run_psi[a].add(float(wsum[a]))
        run_pi_tot += int(block.size)
        run_psi_tot.add(float(np.sum(logs)))
    while next_ck < nk:  # checkpoints beyond the last prime
        for a in residues:
            pi_res[a][next_ck] = run_pi[a]
            psi_res[a][next_ck] = run_psi[a].value
        pi_tot[next_ck] = run_pi_tot
        psi_tot[next_ck] = run_psi_tot.value
        next_ck += 1

    # prime powers p^k, k >= 2: only O(sqrt(x_max)) of them, separate pass
    base = simple_sieve(math.isqrt(scan_to))
    pps = _prime_powers(scan_to, base)
    Pi_res = {a: pi_res[a].astype(np.float64).copy() for a in residues}
    Pi_tot = pi_tot.astype(np.float64).copy()
    if pps:
        ns = np.array([n for n, _, _ in pps], dtype=np.int64)
        lp = np.array([math.log(p) for _, p, _ in pps])
        invk = np.array([1.0 / k for _, _, k in pps])
        rs = ns % q
        for j, x in enumerate(ck):
            m = int(np.searchsorted(ns, x, side="right"))
            psi_tot[j] += float(np.sum(lp[:m]))
            Pi_tot[j] += float(np.sum(invk[:m]))
            if m:
                wl = np.bincount(rs[:m].astype(np.int64), weights=lp[:m], minlength=q)
                wk = np.bincount(rs[:m].astype(np.int64), weights=invk[:m], minlength=q)
                for a in residues:
                    psi_res[a][j] += float(wl[a])
                    Pi_res[a][j] += float(wk[a])

    return ResidueCensus(q=q, checkpoints=ck, residues=residues,
                         pi=pi_res, psi=psi_res, Pi=Pi_res,
                         pi_total=pi_tot, psi_total=psi_tot, Pi_total=Pi_tot)


def psi_chi(x, chi, census_data=None):
    """Character-weighted Chebyshev sum over n <= x of chi(n) * Lambda(n).

    If a census for chi's modulus with checkpoint x is supplied, the sum
    is recombined from its residue classes; otherwise prime powers are
    enumerated directly (fine for desk-scale x).
    """
    x = int(math.floor(x))
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    q = chi.q
    if census_data is not None and census_data.q == q:
        try:
            return complex(sum(chi(a) * census_data.psi_at(x, a)
                               for a in census_data.residues))
        except KeyError:
            pass
    if x > 10 ** 8:
        raise CapacityError("direct psi_chi enumeration capped at 1e8")
    total = 0j
    for block in iter_primes(x):
        vals = chi.on(block)
        total += complex(np.sum(vals * np.log(block.astype(np.float64))))
    base = simple_sieve(math.isqrt(x)) if x >= 4 else []
    for n, p, _k in _prime_powers(x, base):
        total += chi(n) * math.log(p)
    return total
