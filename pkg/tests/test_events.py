import numpy as np

from llgfront.collective.events import detect_events, jump_coincidence


def test_constant_width_has_no_events():
    t = np.arange(1000) * 0.01
    events, waits = detect_events(t, np.ones_like(t), np.zeros_like(t), 1.5)
    assert events == [] and waits.size == 0


def test_two_injected_excursions():
    t = np.arange(2000) * 0.01
    w = np.ones_like(t)
    w[300:351] = 3.0
    w[1200:1261] = np.linspace(2, 5, 61)
    phi = np.cumsum(w - 1) * 0.01
    events, waits = detect_events(t, w, phi, 1.5)
    assert len(events) == 2
    assert (events[0].start_index, events[0].end_index) == (300, 350)
    assert (events[1].start_index, events[1].end_index) == (1200, 1260)
    assert events[1].peak_w == 5.0
    assert events[0].delta_phi == phi[350] - phi[300]
    np.testing.assert_allclose(waits, [t[1200] - t[300]])


def test_close_excursions_merge():
    t = np.arange(500) * 0.01
    w = np.ones_like(t)
    w[100:110] = 2.0
    w[115:120] = 2.0  # gap of 5 samples < 10
    w[200:210] = 2.0  # gap of 80 samples
    events, _ = detect_events(t, w, np.zeros_like(t), 1.5)
    assert [(e.start_index, e.end_index) for e in events] == [(100, 119), (200, 209)]


def test_jump_coincidence():
    t = np.arange(10000) * 0.01
    w = np.ones_like(t)
    w[5000:5050] = 4.0
    phi = np.cumsum(np.where(w > 1, 1.0, 1e-3 * np.sin(t)))
    events, _ = detect_events(t, w, phi, 1.5)
    assert jump_coincidence(t, phi, events) == 1.0
    assert jump_coincidence(t, phi, []) == 0.0
