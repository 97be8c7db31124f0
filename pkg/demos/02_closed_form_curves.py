"""Closed-form error probability across synchronism assumptions.

Ten users, one at half the energy of the nine interferers, single-path
links. Sweeping the SINR (noise-dominated on the left, interference-
dominated on the right) separates the systems: asynchronous users hurt
less than chip- or symbol-aligned ones, and disabling the per-pulse
polarity randomization makes the interference add coherently and costs
the most. Note the interference floor: the SINR definition caps at
10*log10(E1 N / sum E_k) as the noise goes to zero, here about 6.2 dB.
"""

import numpy as np

from thuwb import BepMode, BepQuery, PulseShape, SystemParams, bep

E1, E_INT, N_USERS = 0.5, 1.0, 10
N_FRAMES, N_CHIPS = 15, 5
GAIN = N_FRAMES * N_CHIPS

doublet = PulseShape.gaussian_doublet()
rect = PulseShape.rectangular()

print("sinr_db    sync      async(doublet)  async(rect)   no-polarity")
for sinr_db in np.arange(0.0, 6.5, 0.5):
    noise = E1 * 10 ** (-sinr_db / 10) - (N_USERS - 1) * E_INT / GAIN
    if noise < 0:
        break
    params = SystemParams(
        n_users=N_USERS,
        n_frames=N_FRAMES,
        n_chips_per_frame=N_CHIPS,
        bit_energy=(E1,) + (E_INT,) * (N_USERS - 1),
        noise_psd=noise,
    )
    sync = bep(BepQuery(params=params, mode=BepMode.AWGN_SYNC))
    async_d = bep(BepQuery(params=params, mode=BepMode.AWGN_ASYNC, pulse=doublet))
    async_r = bep(BepQuery(params=params, mode=BepMode.AWGN_ASYNC, pulse=rect))
    nopol = bep(BepQuery(params=params, mode=BepMode.AWGN_NO_POLARITY_SYNC))
    print(f"{sinr_db:7.1f}   {sync:.3e}     {async_d:.3e}     {async_r:.3e}    {nopol:.3e}")
