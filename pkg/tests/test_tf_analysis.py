"""Windows, STFT, synchrosqueezing, reassignment, display, ridges."""

import numpy as np
import pytest

from nyqmirror import UniformSignal
from nyqmirror.tf_analysis import (
    TFRepresentation,
    log_display,
    make_windows,
    multitaper,
    reassign,
    ridge_extract,
    stft,
    synchrosqueeze,
)

RATE = 64.0


def tone(freq, duration=20.0, rate=RATE, amp=1.0):
    t = np.arange(int(duration * rate)) / rate
    return UniformSignal(values=amp * np.cos(2.0 * np.pi * freq * t), rate=rate)


def interior(tfr, margin):
    return (tfr.time_axis >= tfr.time_axis[0] + margin) & (
        tfr.time_axis <= tfr.time_axis[-1] - margin
    )


# ---------------------------------------------------------------------------
# windows
# ---------------------------------------------------------------------------

def test_gaussian_window_symmetric_and_normalized():
    win = make_windows("gaussian", 4.0, RATE)[0]
    np.testing.assert_array_equal(win.samples, win.samples[::-1])
    assert np.sum(win.samples**2) == pytest.approx(1.0, abs=1e-12)
    assert len(win) % 2 == 1


def test_hermite_tapers_orthonormal():
    wins = make_windows("hermite", 4.0, RATE, 3)
    gram = np.array([[np.dot(a.samples, b.samples) for b in wins] for a in wins])
    assert np.max(np.abs(gram - np.eye(3))) <= 1e-6


def test_hermite_first_taper_is_gaussian():
    gauss = make_windows("gaussian", 4.0, RATE)[0]
    herm = make_windows("hermite", 4.0, RATE, 2)[0]
    cos_sim = np.dot(gauss.samples, herm.samples)
    assert cos_sim >= 0.999


def test_window_preconditions():
    with pytest.raises(ValueError):
        make_windows("gaussian", 0.1, RATE)  # under 16 samples
    with pytest.raises(ValueError):
        make_windows("hermite", 4.0, RATE, 11)
    with pytest.raises(ValueError):
        make_windows("gaussian", 4.0, RATE, 2)
    with pytest.raises(ValueError):
        make_windows("boxcar", 4.0, RATE)


def test_gaussian_derivative_consistent():
    win = make_windows("gaussian", 4.0, RATE)[0]
    u = (np.arange(len(win)) - (len(win) - 1) / 2.0) / RATE
    numeric = np.gradient(win.samples, u)
    assert np.max(np.abs(numeric - win.derivative)) < 1e-2 * np.max(
        np.abs(win.derivative)
    )


def test_hermite_derivatives_consistent():
    # the ladder-recurrence analytic derivative agrees with a numeric
    # gradient for every taper (limit here is the finite-difference error)
    for k, win in enumerate(make_windows("hermite", 4.0, RATE, 4)):
        u = (np.arange(len(win)) - (len(win) - 1) / 2.0) / RATE
        numeric = np.gradient(win.samples, u)
        scale = np.max(np.abs(win.derivative))
        assert np.max(np.abs(numeric - win.derivative)) < 1e-2 * scale


# ---------------------------------------------------------------------------
# stft
# ---------------------------------------------------------------------------

def test_stft_tone_localization():
    sig = tone(2.5, rate=64.0)
    win = make_windows("gaussian", 4.0, 64.0)[0]
    tfr = stft(sig, win, hop=8, nfft=2048)
    keep = interior(tfr, 2.5)
    peaks = tfr.freq_axis[np.argmax(np.abs(tfr.matrix[:, keep]), axis=0)]
    assert np.max(np.abs(peaks - 2.5)) <= 64.0 / 2048


def test_stft_zero_signal():
    sig = UniformSignal(values=np.zeros(1024), rate=RATE)
    win = make_windows("gaussian", 4.0, RATE)[0]
    tfr = stft(sig, win, hop=8, nfft=512)
    assert np.all(tfr.matrix == 0.0)


def test_stft_two_tones_resolved():
    t = np.arange(int(30 * RATE)) / RATE
    sig = UniformSignal(np.cos(2 * np.pi * 1.0 * t) + np.cos(2 * np.pi * 3.0 * t),
                        rate=RATE)
    win = make_windows("gaussian", 6.0, RATE)[0]
    tfr = stft(sig, win, hop=16, nfft=4096)
    keep = interior(tfr, 4.0)
    mag = np.abs(tfr.matrix[:, keep])
    for target in (1.0, 3.0):
        band = (tfr.freq_axis >= target - 1.0) & (tfr.freq_axis <= target + 1.0)
        peaks = tfr.freq_axis[band][np.argmax(mag[band], axis=0)]
        assert np.max(np.abs(peaks - target)) <= RATE / 4096


def test_stft_linearity():
    rng = np.random.default_rng(5)
    x = rng.normal(size=512)
    y = rng.normal(size=512)
    win = make_windows("gaussian", 2.0, RATE)[0]
    fa = stft(UniformSignal(x, RATE), win, 4, 256).matrix
    fb = stft(UniformSignal(y, RATE), win, 4, 256).matrix
    fab = stft(UniformSignal(2.0 * x - 0.5 * y, RATE), win, 4, 256).matrix
    scale = np.max(np.abs(fab))
    assert np.max(np.abs(fab - (2.0 * fa - 0.5 * fb))) <= 1e-10 * scale


def test_stft_rejects_short_signal():
    sig = UniformSignal(values=np.ones(64), rate=RATE)
    win = make_windows("gaussian", 4.0, RATE)[0]
    with pytest.raises(ValueError, match="shorter than window"):
        stft(sig, win, 8, 512)


def test_stft_rejects_small_nfft():
    sig = tone(2.0)
    win = make_windows("gaussian", 4.0, RATE)[0]
    with pytest.raises(ValueError, match="nfft"):
        stft(sig, win, 8, 128)


# ---------------------------------------------------------------------------
# synchrosqueezing
# ---------------------------------------------------------------------------

def test_sst_column_sums_preserved():
    sig = tone(2.5)
    win = make_windows("gaussian", 4.0, RATE)[0]
    base = stft(sig, win, 8, 2048)
    squeezed = synchrosqueeze(sig, win, 8, 2048, threshold=0.0)
    ref = base.matrix.sum(axis=0)
    got = squeezed.matrix.sum(axis=0)
    assert np.max(np.abs(ref - got)) <= 1e-6 * np.max(np.abs(ref))


def test_sst_concentrates_tone():
    sig = tone(2.5)
    win = make_windows("gaussian", 4.0, RATE)[0]
    tfr = synchrosqueeze(sig, win, 8, 2048)
    keep = interior(tfr, 2.5)
    mag = np.abs(tfr.matrix[:, keep])
    band = np.abs(tfr.freq_axis - 2.5) <= 2.0 * RATE / 2048
    assert mag[band].sum() / mag.sum() >= 0.90


def test_sst_zero_signal():
    sig = UniformSignal(values=np.zeros(1024), rate=RATE)
    win = make_windows("gaussian", 4.0, RATE)[0]
    assert np.all(synchrosqueeze(sig, win, 8, 512).matrix == 0.0)


# ---------------------------------------------------------------------------
# reassignment
# ---------------------------------------------------------------------------

def test_rm_total_mass_preserved():
    rng = np.random.default_rng(9)
    sig = UniformSignal(rng.normal(size=1024), rate=RATE)
    win = make_windows("gaussian", 3.0, RATE)[0]
    base = stft(sig, win, 4, 1024)
    moved = reassign(sig, win, 4, 1024, threshold=0.0)
    ref = float(np.sum(np.abs(base.matrix) ** 2))
    assert abs(moved.matrix.sum() - ref) <= 1e-6 * ref
    assert np.all(moved.matrix >= 0.0)


def test_rm_concentrates_tone():
    sig = tone(2.5)
    win = make_windows("gaussian", 4.0, RATE)[0]
    tfr = reassign(sig, win, 8, 2048)
    keep = interior(tfr, 2.5)
    mass = tfr.matrix[:, keep]
    band = np.abs(tfr.freq_axis - 2.5) <= 2.0 * RATE / 2048
    assert mass[band].sum() / mass.sum() >= 0.95


def test_rm_impulse_concentrates_in_time():
    values = np.zeros(1024)
    values[512] = 1.0
    sig = UniformSignal(values=values, rate=RATE)
    win = make_windows("gaussian", 3.0, RATE)[0]
    hop = 4
    tfr = reassign(sig, win, hop, 1024)
    t0 = 512 / RATE
    near = np.abs(tfr.time_axis - t0) <= 2.0 * hop / RATE
    assert tfr.matrix[:, near].sum() / tfr.matrix.sum() >= 0.95


def test_rm_zero_signal():
    sig = UniformSignal(values=np.zeros(1024), rate=RATE)
    win = make_windows("gaussian", 4.0, RATE)[0]
    assert np.all(reassign(sig, win, 8, 512).matrix == 0.0)


# ---------------------------------------------------------------------------
# multitaper
# ---------------------------------------------------------------------------

def test_multitaper_needs_two_tapers():
    sig = tone(2.5)
    with pytest.raises(ValueError):
        multitaper(sig, 4.0, 1, 8, 2048)


def test_multitaper_ridge_matches_single_taper():
    sig = tone(2.5)
    win = make_windows("gaussian", 4.0, RATE)[0]
    single = synchrosqueeze(sig, win, 8, 2048)
    multi = multitaper(sig, 4.0, 3, 8, 2048, "sst")
    keep = interior(single, 2.5)
    a = single.freq_axis[np.argmax(np.abs(single.matrix[:, keep]), axis=0)]
    b = multi.freq_axis[np.argmax(multi.matrix[:, keep], axis=0)]
    assert np.max(np.abs(a - b)) <= RATE / 2048
    assert multi.method == "mt_sst"


def test_multitaper_reduces_noise_variance():
    # per-pixel variance across seeds drops when averaging 3 orthogonal
    # tapers of white noise
    win = make_windows("hermite", 2.0, 32.0, 1)[0]
    singles, multis = [], []
    for seed in range(50):
        x = np.random.default_rng(seed).normal(size=256)
        sig = UniformSignal(values=x, rate=32.0)
        singles.append(np.abs(synchrosqueeze(sig, win, 8, 128).matrix))
        multis.append(multitaper(sig, 2.0, 3, 8, 128, "sst").matrix)
    var_single = np.var(np.stack(singles), axis=0)
    var_multi = np.var(np.stack(multis), axis=0)
    assert np.mean(var_multi) < 0.6 * np.mean(var_single)
    frac_reduced = np.mean(var_multi < var_single)
    assert frac_reduced > 0.95


# ---------------------------------------------------------------------------
# determinism
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("method", ["stft", "sst", "rm"])
def test_bit_identical_across_runs_and_chunks(method):
    rng = np.random.default_rng(21)
    sig = UniformSignal(rng.normal(size=700), rate=RATE)
    win = make_windows("gaussian", 2.0, RATE)[0]
    fns = {"stft": stft, "sst": synchrosqueeze, "rm": reassign}
    fn = fns[method]
    ref = fn(sig, win, 4, 256, chunk=128).matrix
    again = fn(sig, win, 4, 256, chunk=128).matrix
    np.testing.assert_array_equal(ref, again)
    for chunk in (1, 7, 64, 4096):
        np.testing.assert_array_equal(ref, fn(sig, win, 4, 256, chunk=chunk).matrix)


# ---------------------------------------------------------------------------
# log display
# ---------------------------------------------------------------------------

def zero_tfr(bins=16, frames=8):
    from nyqmirror.tf_analysis import WindowMeta

    return TFRepresentation(
        matrix=np.zeros((bins, frames)),
        freq_axis=np.arange(bins) * 1.0,
        time_axis=np.arange(frames) * 0.5,
        method="rm",
        window_meta=WindowMeta("gaussian", 1.0, 1, 1),
    )


def test_log_display_zero_matrix():
    disp = log_display(zero_tfr())
    np.testing.assert_array_equal(disp.matrix, np.full((16, 8), 1e-2))


def test_log_display_unit_entry():
    from nyqmirror.tf_analysis import WindowMeta

    mat = np.zeros((10, 10))
    mat[3, 4] = np.e - 1.0
    tfr = TFRepresentation(mat, np.arange(10.0), np.arange(10.0), "rm",
                           WindowMeta("gaussian", 1.0, 1, 1))
    disp = log_display(tfr, quantile=1.0)
    assert disp.matrix[3, 4] == pytest.approx(1.0, abs=1e-12)


def test_log_display_clips_outlier():
    from nyqmirror.tf_analysis import WindowMeta

    rng = np.random.default_rng(3)
    mat = rng.uniform(0.0, 1.0, (50, 40))
    mat[10, 10] = 1e9
    tfr = TFRepresentation(mat, np.arange(50.0), np.arange(40.0), "rm",
                           WindowMeta("gaussian", 1.0, 1, 1))
    disp = log_display(tfr)
    q = np.quantile(mat.ravel(), 0.998)
    assert disp.quantile_q == pytest.approx(q)
    assert disp.matrix[10, 10] == pytest.approx(np.log1p(q), abs=1e-12)
    assert np.min(disp.matrix) >= 1e-2
    assert np.max(disp.matrix) <= np.log1p(q) + 1e-12


# ---------------------------------------------------------------------------
# ridge extraction
# ---------------------------------------------------------------------------

def test_ridge_pure_tone_constant():
    sig = tone(2.5)
    win = make_windows("gaussian", 4.0, RATE)[0]
    tfr = synchrosqueeze(sig, win, 8, 2048)
    ridge = ridge_extract(tfr, 1.0, 4.0, jump_penalty=0.0)
    keep = interior(tfr, 2.5)
    assert np.max(np.abs(ridge[keep] - 2.5)) <= RATE / 2048


def test_ridge_zero_matrix_lowest_bin():
    tfr = zero_tfr()
    ridge = ridge_extract(tfr, 3.0, 10.0, jump_penalty=0.5)
    band_lo = tfr.freq_axis[(tfr.freq_axis >= 3.0)][0]
    np.testing.assert_array_equal(ridge, band_lo)


def test_ridge_tracks_linear_chirp():
    rate = 16.0
    duration = 60.0
    t = np.arange(int(duration * rate)) / rate
    f0, f1 = 1.0, 3.0
    phase = f0 * t + (f1 - f0) / (2.0 * duration) * t**2
    sig = UniformSignal(np.cos(2.0 * np.pi * phase), rate=rate)
    win = make_windows("gaussian", 4.0, rate)[0]
    nfft = 2048
    tfr = synchrosqueeze(sig, win, 4, nfft)
    ridge = ridge_extract(tfr, 0.5, 4.0, jump_penalty=0.0)
    truth = f0 + (f1 - f0) / duration * tfr.time_axis
    keep = interior(tfr, 3.0)
    assert np.max(np.abs(ridge[keep] - truth[keep])) <= 2.0 * rate / nfft


def test_ridge_empty_band_rejected():
    with pytest.raises(ValueError):
        ridge_extract(zero_tfr(), 100.0, 200.0)


# ---------------------------------------------------------------------------
# TFRepresentation validation
# ---------------------------------------------------------------------------

def test_tfr_validation():
    from nyqmirror.tf_analysis import WindowMeta

    meta = WindowMeta("gaussian", 1.0, 1, 1)
    with pytest.raises(ValueError, match="method"):
        TFRepresentation(np.zeros((2, 2)), np.arange(2.0), np.arange(2.0),
                         "bogus", meta)
    with pytest.raises(ValueError, match="axes"):
        TFRepresentation(np.zeros((2, 2)), np.array([1.0, 0.5]),
                         np.arange(2.0), "stft", meta)
    with pytest.raises(ValueError, match="nonnegative"):
        TFRepresentation(-np.ones((2, 2)), np.arange(2.0), np.arange(2.0),
                         "rm", meta)
    with pytest.raises(ValueError, match="dimensions"):
        TFRepresentation(np.zeros((3, 2)), np.arange(2.0), np.arange(2.0),
                         "stft", meta)
