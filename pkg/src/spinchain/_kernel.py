"""Compiled fixed-step RK4 kernel for the interaction-picture amplitudes."""
import numba
import numpy as np

# Pair phases are advanced by multiplication and recomputed exactly this often.
_RESYNC = 512


@numba.njit(cache=True)
def _accumulate(out, src, lower, upper, z):
    for i in range(out.shape[0]):
        out[i] = 0.0
    for p in range(lower.shape[0]):
        g = lower[p]
        e = upper[p]
        out[g] += z[p] * src[e]
        out[e] -= np.conj(z[p]) * src[g]


@numba.njit(cache=True)
def rk4_evolve(amps, lower, upper, detuning, coupling, phase, t0, h, n_steps, sample_steps):
    """Advance ``amps`` by ``n_steps`` RK4 steps of size ``h``.

    The derivative is ``dD_g = z D_e`` and ``dD_e = -conj(z) D_g`` for every
    active pair ``(g, e)``, with ``z = i * coupling * exp(i (detuning t + phase))``.
    ``detuning`` and ``coupling`` are angular (rad/us). States at the step
    indices listed in ``sample_steps`` (ascending) are copied into the
    returned sample array.
    """
    n_amp = amps.shape[0]
    n_pair = lower.shape[0]
    d = amps.copy()
    samples = np.empty((sample_steps.shape[0], n_amp), dtype=np.complex128)
    next_sample = 0

    z0 = np.empty(n_pair, dtype=np.complex128)
    zh = np.empty(n_pair, dtype=np.complex128)
    z1 = np.empty(n_pair, dtype=np.complex128)
    rot_half = np.empty(n_pair, dtype=np.complex128)
    for p in range(n_pair):
        rot_half[p] = np.exp(0.5j * detuning[p] * h)

    k1 = np.empty(n_amp, dtype=np.complex128)
    k2 = np.empty(n_amp, dtype=np.complex128)
    k3 = np.empty(n_amp, dtype=np.complex128)
    k4 = np.empty(n_amp, dtype=np.complex128)
    tmp = np.empty(n_amp, dtype=np.complex128)

    for step in range(n_steps):
        while next_sample < sample_steps.shape[0] and sample_steps[next_sample] == step:
            samples[next_sample, :] = d
            next_sample += 1
        if step % _RESYNC == 0:
            t = t0 + step * h
            for p in range(n_pair):
                z0[p] = 1j * coupling * np.exp(1j * (detuning[p] * t + phase))
        for p in range(n_pair):
            zh[p] = z0[p] * rot_half[p]
            z1[p] = zh[p] * rot_half[p]

        _accumulate(k1, d, lower, upper, z0)
        for i in range(n_amp):
            tmp[i] = d[i] + 0.5 * h * k1[i]
        _accumulate(k2, tmp, lower, upper, zh)
        for i in range(n_amp):
            tmp[i] = d[i] + 0.5 * h * k2[i]
        _accumulate(k3, tmp, lower, upper, zh)
        for i in range(n_amp):
            tmp[i] = d[i] + h * k3[i]
        _accumulate(k4, tmp, lower, upper, z1)
        for i in range(n_amp):
            d[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])

        for p in range(n_pair):
            z0[p] = z1[p]

    while next_sample < sample_steps.shape[0]:
        samples[next_sample, :] = d
        next_sample += 1
    return d, samples
