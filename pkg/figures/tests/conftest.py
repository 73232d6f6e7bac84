import pytest

META = """\
# tool=ghzq
# version=0.1.0
# kind={kind}
# command=ghzq {kind} --m 2,3 --samples 1000 --seed 7
# seed=7
"""


def _csv(kind: str, header: str, rows: list[str]) -> str:
    return META.format(kind=kind) + header + "\n" + "\n".join(rows) + "\n"


@pytest.fixture
def bell_sweep_csv(tmp_path):
    text = _csv(
        "bell-sweep",
        "m,convention,samples,f_value,f_stderr,f_qm,ratio,ratio_stderr,"
        "lhv_ratio,genuine_threshold,seed",
        [
            "3,mermin,1000,3.9,0.1,4.0,0.975,0.025,0.5,0.7071067811865475,7",
            "5,mermin,1000,16.2,0.6,16.0,1.0125,0.0375,0.25,0.7071067811865475,7",
            "7,mermin,1000,63.0,3.0,64.0,0.984,0.047,0.125,0.7071067811865475,7",
        ],
    )
    path = tmp_path / "sweep.csv"
    path.write_text(text)
    return path


@pytest.fixture
def scaling_csv(tmp_path):
    text = _csv(
        "scaling",
        "m,rel_err_F,rel_err_N,samples,seed",
        [
            "4,0.002,0.0012,100000,7",
            "6,0.0033,0.0011,100000,7",
            "8,0.005,0.001,100000,7",
            "10,0.0078,0.00098,100000,7",
        ],
    )
    path = tmp_path / "scaling.csv"
    path.write_text(text)
    return path


@pytest.fixture
def scatter_csv(tmp_path):
    rows = []
    for i in range(50):
        x = (i % 7 - 3) * 0.8
        y = (i % 5 - 2) * 0.9
        rows.append(f"{i},{x},{y},{-x * y},{x * y * 0.5}")
    text = _csv("scatter", "sample_index,re_factor_a,re_factor_b,term_x,term_y", rows)
    path = tmp_path / "scatter.csv"
    path.write_text(text)
    return path


@pytest.fixture
def decoherence_csv(tmp_path):
    rows = []
    for m in (2, 3):
        for tau in range(6):
            analytic = 2.718281828 ** (-0.01 * m * m * tau / 2)
            rows.append(f"{m},{tau},{analytic},{0.01},{analytic},1.0,0.01")
    text = _csv(
        "decoherence",
        "m,tau,f_ratio,stderr,analytic_ratio,f_value,f_stderr",
        rows,
    )
    path = tmp_path / "deco.csv"
    path.write_text(text)
    return path
