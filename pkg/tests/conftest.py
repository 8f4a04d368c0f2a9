import numpy as np
import pytest

from relaysim.channel import ChannelRealization


def random_realization(rng, n_rx: int, n_tx: int, n_clusters: int = 3,
                       link_kind: str = "SD", max_delay: float = 100e-9,
                       doppler: float = 0.0) -> ChannelRealization:
    """Small synthetic realization with i.i.d. complex Gaussian entries."""
    mats = (rng.standard_normal((n_clusters, n_rx, n_tx))
            + 1j * rng.standard_normal((n_clusters, n_rx, n_tx))) / np.sqrt(2)
    delays = np.sort(rng.uniform(0, max_delay, n_clusters))
    delays[0] = 0.0
    dopplers = (rng.uniform(-doppler, doppler, n_clusters)
                if doppler else np.zeros(n_clusters))
    return ChannelRealization(per_cluster=mats, delays_s=delays,
                              dopplers_hz=dopplers, link_kind=link_kind)


def unit_codeword(vec):
    from relaysim.antenna import Codeword
    v = np.asarray(vec, dtype=complex)
    return Codeword(v / np.linalg.norm(v))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
