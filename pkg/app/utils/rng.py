"""
재현 가능한 난수 스트림

시행 j의 시드는 splitmix64(master_seed, j)로 결정되므로,
워커 수나 실행 순서와 무관하게 같은 시행은 같은 난수를 받는다.
"""
import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """splitmix64 한 단계 (입력 상태 -> 64비트 출력)"""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, index: int) -> int:
    """시행별 시드: master와 인덱스를 섞은 뒤 splitmix64"""
    mixed = (splitmix64(master_seed & _MASK64) ^ ((index * _GOLDEN) & _MASK64)) & _MASK64
    return splitmix64(mixed)


def trial_generator(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master_seed, index)))


def trial_normals(master_seed: int, start: int, count: int, size: int) -> np.ndarray:
    """
    시행 start..start+count-1 각각의 독립 스트림에서 표준정규 size개씩 뽑아
    (count, size) 배열로 반환
    """
    out = np.empty((count, size))
    for row in range(count):
        out[row] = trial_generator(master_seed, start + row).standard_normal(size)
    return out
