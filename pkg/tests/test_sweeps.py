import math

import numpy as np
import pytest
from numpy.testing import assert_array_equal
from pydantic import ValidationError

from src.errors import BlockOverlapError, GridError
from src.models.encoding_model import EncodingName, LogicalEncoding
from src.models.sweep_model import SweepResult, SweepSpec, uniform_grid
from src.services.sweep_service import (
    SweepRunner,
    avg_fidelity_vs_length,
    fidelity_site_traces,
    max_fidelity_surface,
    max_fidelity_vs_length,
)


def _peak_in(trace, start: float, stop: float):
    inside = [peak for peak in trace.peaks if start <= peak.time <= stop]
    assert inside, f"no peak in [{start}, {stop}]"
    return max(inside, key=lambda peak: peak.value)


def test_uniform_grid_includes_both_ends():
    assert uniform_grid(0.0, 1.0, 0.25) == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_uniform_grid_rejects_bad_steps():
    with pytest.raises(GridError):
        uniform_grid(0.0, 1.0, 0.0)
    with pytest.raises(GridError):
        uniform_grid(1.0, 0.0, 0.5)


def test_default_time_grid():
    grid = SweepSpec().time_grid()
    assert len(grid) == 2001
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(100.0)


@pytest.mark.parametrize("fields", [{"n_values": [8, 6]}, {"n_values": []}, {"thetas": [0.0, 4.0]}, {"encodings": []}])
def test_invalid_domains(fields):
    with pytest.raises(ValidationError):
        SweepSpec(**fields)


def test_result_shape_must_match_axes():
    with pytest.raises(ValidationError):
        SweepResult(
            name="broken",
            axes={"n": [4, 5]},
            values=np.zeros(3),
            t_star=np.zeros(3),
            f_refined=np.zeros(3),
        )


def test_two_spin_transfer_is_nearly_perfect_on_short_chains():
    spec = SweepSpec(encodings=[EncodingName.TWO_QUBIT], n_values=[4, 5])
    result = max_fidelity_vs_length(spec, max_workers=1)
    assert result.value_at(encoding="two-qubit", n=4) >= 0.98
    assert result.value_at(encoding="two-qubit", n=5) >= 0.98


def test_nothing_transfers_on_a_zero_length_time_grid():
    spec = SweepSpec(encodings=[EncodingName.TWO_QUBIT], n_values=[4], t_max=0.0)
    result = max_fidelity_vs_length(spec, max_workers=1)
    assert result.values.shape == (1, 1)
    assert result.values[0, 0] == pytest.approx(0.0, abs=1e-12)


def test_overlapping_blocks_are_rejected():
    spec = SweepSpec(encodings=[EncodingName.FOUR_QUBIT], n_values=[6, 7, 8])
    with pytest.raises(BlockOverlapError):
        max_fidelity_vs_length(spec, max_workers=1)


def test_results_do_not_depend_on_worker_count():
    spec = SweepSpec(
        encodings=[EncodingName.TWO_QUBIT, EncodingName.FOUR_QUBIT],
        n_values=list(range(8, 14)),
        t_max=20.0,
    )
    serial = SweepRunner(max_workers=1).max_fidelity_vs_length(spec)
    parallel = SweepRunner(max_workers=4).max_fidelity_vs_length(spec)
    assert_array_equal(serial.values, parallel.values)
    assert_array_equal(serial.t_star, parallel.t_star)


def test_denser_time_grid_never_lowers_the_maximum():
    domains = {"encodings": [EncodingName.THREE_QUBIT_1], "n_values": [8, 12, 16], "t_max": 30.0}
    coarse = max_fidelity_vs_length(SweepSpec(t_step=0.1, **domains), max_workers=1)
    fine = max_fidelity_vs_length(SweepSpec(t_step=0.05, **domains), max_workers=1)
    assert np.all(fine.values >= coarse.values - 1e-12)


def test_refined_maximum_is_at_least_the_grid_maximum():
    result = max_fidelity_vs_length(SweepSpec(encodings=[EncodingName.FOUR_QUBIT], n_values=[8, 9]), max_workers=1)
    assert np.all(result.f_refined >= result.values - 1e-12)
    assert np.all((result.t_star >= 0.0) & (result.t_star <= 100.0))


def test_long_format_rows_and_argmax_records():
    spec = SweepSpec(encodings=[EncodingName.TWO_QUBIT], n_values=[4, 5, 6], t_max=10.0)
    result = max_fidelity_vs_length(spec, max_workers=1)
    rows = result.to_rows()
    assert len(rows) == 3
    assert set(rows[0]) == {"encoding", "n", "F", "F_refined", "t_star"}
    [record] = result.argmax_records()
    assert record["F_max"] == pytest.approx(result.values.max())


def test_three_qubit_code_at_the_singlet_angle_reproduces_the_singlet_transfer():
    theta = 2 * math.pi / 3
    n = 20
    surface = max_fidelity_surface(
        SweepSpec(encodings=[EncodingName.THREE_QUBIT_1], n_values=[n], thetas=[theta], t_max=40.0), max_workers=1
    )
    singlet = max_fidelity_vs_length(
        SweepSpec(encodings=[EncodingName.VACUUM_SINGLET], n_values=[n], thetas=[math.pi], t_max=40.0),
        max_workers=1,
    )
    assert surface.values[0, 0] == pytest.approx(singlet.values[0, 0], abs=1e-10)


@pytest.mark.slow
def test_surface_peaks_at_the_singlet_angle_for_every_length():
    thetas = [k * math.pi / 60 for k in range(61)]
    spec = SweepSpec(encodings=[EncodingName.THREE_QUBIT_1], n_values=list(range(6, 51)), thetas=thetas)
    result = max_fidelity_surface(spec)

    best = {record["n"]: record["theta"] for record in result.argmax_records()}
    for n in (6, 20, 35, 50):
        assert best[n] == pytest.approx(2 * math.pi / 3, abs=1e-9)

    band = [k for k, theta in enumerate(thetas) if 0.5 * math.pi - 1e-12 <= theta <= 0.8 * math.pi + 1e-12]
    assert result.values[:, band].min() > 0.8


def test_average_fidelity_is_one_half_on_a_zero_length_time_grid():
    spec = SweepSpec(
        encodings=[EncodingName.VACUUM_SINGLET, EncodingName.SINGLE_SPIN],
        n_values=[6, 10],
        t_max=0.0,
        h_values=[0.0, 1.0, 2.0],
    )
    result = avg_fidelity_vs_length(spec, max_workers=1)
    assert result.values == pytest.approx(np.full((2, 2), 0.5), abs=1e-12)
    assert result.h_star is not None and result.h_star.shape == (2, 2)


def test_field_optimization_never_hurts():
    base = {"encodings": [EncodingName.VACUUM_SINGLET], "n_values": [12, 16], "t_max": 30.0}
    fixed = avg_fidelity_vs_length(SweepSpec(h_values=[1.0], **base), max_workers=1)
    swept = avg_fidelity_vs_length(SweepSpec(h_values=uniform_grid(0.0, 2.0, 0.05), **base), max_workers=1)
    assert np.all(swept.values >= fixed.values - 1e-12)


def test_average_surface_for_a_fixed_sector_code_is_field_independent():
    spec = SweepSpec(
        encodings=[EncodingName.TWO_QUBIT], n_values=[6], t_max=10.0, h_values=[0.0, 0.5, 2.0]
    )
    runner = SweepRunner(max_workers=1)
    surface = runner.average_fidelity_surface(
        runner._engine(spec, 6), LogicalEncoding.from_name("two-qubit"), spec.field_grid()
    )
    assert surface.shape == (3, len(spec.time_grid()))
    assert np.max(np.ptp(surface, axis=0)) < 1e-12


@pytest.mark.slow
def test_vacuum_singlet_average_fidelity_stays_high_at_seventy_sites():
    spec = SweepSpec(
        encodings=[EncodingName.VACUUM_SINGLET], n_values=[70], h_values=uniform_grid(0.0, 2.0, 0.05)
    )
    assert avg_fidelity_vs_length(spec).values[0, 0] > 0.9


def test_site_traces_start_on_the_sending_block():
    spec = SweepSpec(encodings=[EncodingName.VACUUM_SINGLET], n_values=[12], thetas=[math.pi], t_max=10.0)
    traces = fidelity_site_traces(spec, max_workers=2)
    assert [trace.site for trace in traces] == list(range(3, 13))
    assert traces[0].values[0] == pytest.approx(1.0, abs=1e-12)


def test_site_traces_reject_sites_off_the_chain():
    spec = SweepSpec(encodings=[EncodingName.VACUUM_SINGLET], n_values=[12], sites=[2, 12], t_max=1.0)
    with pytest.raises(GridError):
        fidelity_site_traces(spec, max_workers=1)


@pytest.mark.slow
def test_forty_eight_site_chain_traces():
    spec = SweepSpec(encodings=[EncodingName.VACUUM_SINGLET], n_values=[48], thetas=[math.pi], sites=[24, 48])
    interior, end = fidelity_site_traces(spec)

    first = _peak_in(end, 20.0, 30.0)
    assert 0.88 <= first.value <= 0.91
    assert 24.0 <= first.time <= 26.5
    second = _peak_in(end, 70.0, 80.0)
    assert 0.77 <= second.value <= 0.80
    assert 73.0 <= second.time <= 77.0

    transit = interior.values[(interior.times >= 10.0) & (interior.times <= 14.0)]
    assert 0.4 <= transit.max() <= 0.6


@pytest.mark.slow
def test_two_hundred_site_chain_still_transfers():
    spec = SweepSpec(
        encodings=[EncodingName.VACUUM_SINGLET], n_values=[48, 200], thetas=[math.pi], t_max=500.0
    )
    result = max_fidelity_vs_length(spec)
    long_chain = result.value_at(encoding="vacuum-singlet", n=200)
    assert 0.65 <= long_chain <= 0.75
    assert long_chain < result.value_at(encoding="vacuum-singlet", n=48)
