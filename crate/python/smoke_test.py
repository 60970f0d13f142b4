"""Smoke test for the bimrecon_py extension module.

Build it first, e.g. `maturin develop -m crates/py/Cargo.toml`, then run
`python python/smoke_test.py`.
"""

import json
import os
import tempfile

import bimrecon_py as br


def main():
    cloud, gt = br.synth_scene(preset="room")
    assert len(cloud) > 1000
    counts = cloud.class_counts()
    assert counts["wall"] > 0, counts
    assert gt.n_walls == 4

    config = br.Config()
    config.seed = 7
    model, report = br.reconstruct(cloud, config)
    assert model.n_walls == 4, model
    assert report["storeys"][0]["planes"] >= 4

    metrics = br.evaluate(model, gt)
    assert metrics["voxel_size"] == 0.05
    wall = next(c for c in metrics["classes"] if c["class"] == "wall")
    assert wall["viou"] > 0.8, wall

    same = br.evaluate(gt, gt, voxel_size=0.1)
    assert same["mean_viou"] == 1.0

    baseline = config.baseline()
    assert not baseline.topology_refinement
    assert br.Config.from_toml(baseline.to_toml()).to_toml() == baseline.to_toml()

    with tempfile.TemporaryDirectory() as tmp:
        ply = os.path.join(tmp, "cloud.ply")
        cloud.write(ply)
        again = br.PointCloud.read(ply)
        assert len(again) == len(cloud)
        model.save(os.path.join(tmp, "model.json"))
        loaded = br.Model.load(os.path.join(tmp, "model.json"))
        assert loaded.to_json() == model.to_json()
        model.export_ifc(os.path.join(tmp, "model.ifc"))
        with open(os.path.join(tmp, "model.ifc")) as f:
            assert f.read().startswith("ISO-10303-21;")
        try:
            br.PointCloud.read(os.path.join(tmp, "missing.ply"))
        except OSError:
            pass
        else:
            raise AssertionError("missing file should raise OSError")

    tiny = br.PointCloud([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)], ["wall", "door"])
    assert tiny.labels() == ["wall", "door"]
    try:
        br.reconstruct(tiny)
    except br.BimreconError:
        pass
    else:
        raise AssertionError("degenerate cloud should raise BimreconError")

    assert json.loads(model.to_json())["schema_version"] == 1
    print("smoke test passed:", model)


if __name__ == "__main__":
    main()
