from dnfapprox.seeding import mix64, trial_seed


def test_trial_seeds_follow_splitmix64_stream():
    # published SplitMix64 outputs for state 0
    assert trial_seed(0, 0) == 0xE220A8397B1DCDAF
    assert trial_seed(0, 1) == 0x6E789E6AA1B965F4
    assert trial_seed(0, 2) == 0x06C45D188009454F


def test_master_seed_changes_stream():
    assert trial_seed(7, 0) != trial_seed(0, 0)
    assert trial_seed(7, 0) == mix64(7 ^ 0x9E3779B97F4A7C15)


def test_mix64_stays_in_64_bits():
    for z in (0, 1, 2 ** 64 - 1, 12345678901234567890):
        assert 0 <= mix64(z) < 2 ** 64
