"""Quick end-to-end check of the Python extension."""

import math
import tempfile

import vitalchirp_py as vc


def main():
    chirp = vc.derive_chirp()
    assert abs(chirp["start_freq"] - 24.4e9) < 1.0
    assert abs(chirp["sweep_bandwidth"] - 4.0e9) < 1.0
    assert abs(chirp["carrier_wavelength"] * 1e3 - 12.287) < 1e-3

    t = vc.fbg_transmission_db(17.70, 11.2e9, [0.0, 5.6e9, 50e9])
    assert abs(t[0] + 17.70) < 1e-9
    assert t[0] < t[1] < t[2]

    bp = vc.BandpassFilter(0.1, 0.5)
    conf = bp.conformance()
    assert conf["conforms"], conf
    assert len(bp.sections) == 4

    fs = 50.0
    x = [math.sin(2 * math.pi * 0.3 * n / fs) + math.sin(2 * math.pi * 3.0 * n / fs) for n in range(3000)]
    y = bp.filtfilt(x)
    mid = y[1000:2000]
    ref = [math.sin(2 * math.pi * 0.3 * n / fs) for n in range(1000, 2000)]
    err = max(abs(a - b) for a, b in zip(mid, ref))
    assert err < 0.2, err

    scen = vc.Scenario.preset("three_volunteers")
    assert scen.validate()["is_valid"]
    bundle = scen.run()
    key = bundle.channels[0]
    series, rate = bundle.contact(key)
    assert rate == 50.0 and len(series) == 3000
    frames = bundle.frames(key)
    assert len(frames) == 3000 and len(frames[0]) == 600

    r = vc.contact_rates(series, rate, 21.0, 87.0)
    assert abs(r["respiration"]["error"]) < 0.5, r
    assert abs(r["heartbeat"]["error"]) < 0.5, r

    reports = bundle.process()
    for ch in reports:
        for rep in ch["reports"]:
            assert abs(rep["respiration"]["error"]) < 0.5, rep
            assert abs(rep["heartbeat"]["error"]) < 0.5, rep
            print(f"{ch['channel']} {rep['label']} {rep['modality']}: "
                  f"{rep['respiration']['rate']:.2f} rpm, {rep['heartbeat']['rate']:.2f} bpm")

    with tempfile.TemporaryDirectory() as d:
        bundle.write(d)
        again = vc.Bundle.read(d)
        assert again.contact(key)[0] == series

    try:
        vc.BandpassFilter(0.5, 0.1)
    except ValueError:
        pass
    else:
        raise AssertionError("inverted band accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
