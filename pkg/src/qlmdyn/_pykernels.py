"""Vectorised numpy implementations of the inner loops.

These mirror ``_ckernels.pyx`` function for function and are used whenever the
compiled extension is unavailable. Link configurations are packed into
integers: bit ``n`` is set iff link ``(n, n+1)`` has ``S^z = +1``.
"""
import numpy as np

TWO_PI = 2.0 * np.pi
_CHUNK = 1 << 18


def link_z(codes, n_sites):
    """Return the (len(codes), n_sites) array of link z-values (+1/-1)."""
    codes = np.asarray(codes, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n_sites, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def matter_z(codes, n_sites):
    """Matter z-values fixed by the Gauss law; may contain +-3 for invalid configs."""
    links = link_z(codes, n_sites).astype(np.int16)
    stagger = np.where(np.arange(n_sites) % 2 == 0, 1, -1).astype(np.int16)
    return stagger - np.roll(links, 1, axis=1) + links


def enumerate_sector(n_sites):
    found = []
    total = 1 << n_sites
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
        sig = matter_z(codes, n_sites)
        found.append(codes[np.all(np.abs(sig) == 1, axis=1)])
    return np.concatenate(found)


def hopping_moves(codes, n_sites):
    """Source/target indices for every sigma_n^+ S_n^+ sigma_{n+1}^- action.

    The Hermitian-conjugate moves are the transposes of these.
    """
    codes = np.asarray(codes, dtype=np.int64)
    links = link_z(codes, n_sites)
    sig = matter_z(codes, n_sites)
    src, dst = [], []
    for n in range(n_sites):
        nxt = (n + 1) % n_sites
        ok = (sig[:, n] == -1) & (links[:, n] == -1) & (sig[:, nxt] == 1)
        idx = np.nonzero(ok)[0]
        src.append(idx)
        dst.append(np.searchsorted(codes, codes[idx] | (1 << n)))
    return np.concatenate(src), np.concatenate(dst)


def string_moves(codes, n_sites):
    """Terms of the gauge-invariant string sum for reference sites 0 and 1.

    Returns ``(src, dst, dist)``; ``dist`` is the signed path length
    (positive clockwise, i.e. ascending site index; zero for the on-site term).
    """
    codes = np.asarray(codes, dtype=np.int64)
    links = link_z(codes, n_sites)
    sig = matter_z(codes, n_sites)
    half = n_sites // 2
    src, dst, dist = [], [], []
    for m in (0, 1):
        for n in range(n_sites):
            if n == m:
                idx = np.nonzero(sig[:, m] == 1)[0]
                src.append(idx)
                dst.append(idx)
                dist.append(np.zeros(len(idx), dtype=np.int64))
                continue
            ends = (sig[:, m] == 1) & (sig[:, n] == -1)
            dc = (n - m) % n_sites
            if dc <= half:
                path = [(m + i) % n_sites for i in range(dc)]
                ok = ends & np.all(links[:, path] == 1, axis=1)
                mask = sum(1 << p for p in path)
                idx = np.nonzero(ok)[0]
                src.append(idx)
                dst.append(np.searchsorted(codes, codes[idx] & ~mask))
                dist.append(np.full(len(idx), dc, dtype=np.int64))
            dcc = n_sites - dc
            if dcc <= half:
                path = [(n + i) % n_sites for i in range(dcc)]
                ok = ends & np.all(links[:, path] == -1, axis=1)
                mask = sum(1 << p for p in path)
                idx = np.nonzero(ok)[0]
                src.append(idx)
                dst.append(np.searchsorted(codes, codes[idx] | mask))
                dist.append(np.full(len(idx), -dcc, dtype=np.int64))
    return np.concatenate(src), np.concatenate(dst), np.concatenate(dist)


def wrap_angles(delta):
    delta = np.asarray(delta, dtype=float)
    return delta - TWO_PI * np.ceil((delta - np.pi) / TWO_PI)


def plaquette_sums(phase):
    """Counter-clockwise wrapped phase sums (in turns) over every unit cell."""
    phase = np.asarray(phase, dtype=float)
    ex = wrap_angles(phase[1:, :] - phase[:-1, :])
    ey = wrap_angles(phase[:, 1:] - phase[:, :-1])
    return (ex[:, :-1] + ey[1:, :] - ex[:, 1:] - ey[:-1, :]) / TWO_PI
