import pytest

from app.config import get_settings
from app.services.spectral_measure import atomic_measure, parse_measure


@pytest.fixture(autouse=True)
def fresh_settings():
    """환경변수를 바꾸는 테스트가 다른 테스트에 새지 않도록 캐시 초기화"""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def single_atom():
    """μ = ½δ_{0.3} + ½δ_{−0.3}, k(x) = cos(2π·0.3x)"""
    return atomic_measure([(0.3, 0.5)])


@pytest.fixture
def uniform_band():
    """(1/4, 1/2] 위의 균일 밀도 (높이 1)"""
    return parse_measure({"density": [{"from": 0.25, "to": 0.5, "height": 1.0}]})


@pytest.fixture
def unit_band_measures():
    """단위 밴드 (1/4, 1/2] 에 지지된 시험용 측도 다섯 개"""
    return {
        "single_atom": atomic_measure([(0.3, 0.5)]),
        "two_atoms": atomic_measure([(0.3, 0.2), (0.45, 0.3)]),
        "three_atoms": atomic_measure([(0.26, 0.1), (0.37, 0.2), (0.49, 0.05)]),
        "uniform": parse_measure({"density": [{"from": 0.25, "to": 0.5, "height": 1.0}]}),
        "mixed": parse_measure(
            {
                "atoms": [{"freq": 0.5, "mass": 0.1}],
                "density": [{"from": 0.3, "to": 0.4, "height": 2.0}],
            }
        ),
    }


@pytest.fixture
def measure_file(tmp_path):
    def _write(doc: str):
        path = tmp_path / "measure.json"
        path.write_text(doc, encoding="utf-8")
        return str(path)

    return _write
