"""Motif classification: nine-class fixtures, totality, ensemble statistics."""

import numpy as np
import pytest

from jjvar.motifs import (
    MOTIF_CLASSES,
    MotifRecord,
    classify_h,
    classify_structure,
    motif_statistics,
)
from jjvar.structure import (
    AtomicStructure,
    neighbor_graph,
    oxide_region,
    surface_sites,
)

from conftest import make_molecule, make_oxide_slab, nine_motif_fixtures


class TestNineClasses:
    @pytest.mark.parametrize(
        "label,structure,h_indices",
        nine_motif_fixtures(),
        ids=[f[0] for f in nine_motif_fixtures()],
    )
    def test_fixture_classifies(self, label, structure, h_indices):
        graph = neighbor_graph(structure)
        for h in h_indices:
            record = classify_h(structure, graph, h)
            assert record.label == label

    def test_water_both_hydrogens(self):
        label, structure, h_indices = [f for f in nine_motif_fixtures() if f[0] == "Al-H2O"][0]
        graph = neighbor_graph(structure)
        labels = {classify_h(structure, graph, h).label for h in h_indices}
        assert labels == {"Al-H2O"}

    def test_non_hydrogen_rejected(self):
        _, structure, _ = nine_motif_fixtures()[0]
        graph = neighbor_graph(structure)
        with pytest.raises(ValueError):
            classify_h(structure, graph, 0)  # atom 0 is O

    def test_hosts_match_arity(self):
        for label, structure, h_indices in nine_motif_fixtures():
            graph = neighbor_graph(structure)
            for h in h_indices:
                rec = classify_h(structure, graph, h)
                if rec.label == "Al-OH":
                    assert len(rec.host_o) == 1 and len(rec.host_al) == 1
                elif rec.label == "Al-OH-Al":
                    assert len(rec.host_o) == 1 and len(rec.host_al) == 2
                elif rec.label == "Al-O-H-O-Al":
                    assert len(rec.host_o) == 2 and len(rec.host_al) == 2
                elif rec.label == "interstitial":
                    assert rec.host_o == () and rec.host_al == ()

    def test_record_rejects_excess_hosts(self):
        with pytest.raises(ValueError):
            MotifRecord(h_index=0, label="Al-OH", host_o=(1, 2), host_al=(3,), surface=False)
        with pytest.raises(ValueError):
            MotifRecord(h_index=0, label="bogus", host_o=(), host_al=(), surface=False)


class TestPrecedenceAndStability:
    def test_three_coordinated_hydroxyl_folds_to_al_oh_al(self):
        structure = make_molecule(
            ["O", "H", "Al", "Al", "Al"],
            [(0, 0, 0), (0, 0, 0.97), (1.9, 0, -0.4), (-1.9, 0, -0.4), (0, 1.9, -0.4)],
        )
        graph = neighbor_graph(structure)
        rec = classify_h(structure, graph, 1)
        assert rec.label == "Al-OH-Al"
        assert len(rec.host_al) == 2

    def test_perturbation_stability(self):
        rng = np.random.default_rng(17)
        for label, structure, h_indices in nine_motif_fixtures():
            for _ in range(5):
                jitter = rng.uniform(-0.009, 0.009, size=structure.positions.shape)
                moved = AtomicStructure(
                    cell=structure.cell,
                    pbc=structure.pbc,
                    species=structure.species,
                    positions=structure.positions + jitter,
                )
                graph = neighbor_graph(moved)
                for h in h_indices:
                    assert classify_h(moved, graph, h).label == label

    def test_totality_on_random_structures(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            n = 40
            species = tuple(rng.choice(["Al", "O", "H"], size=n))
            s = AtomicStructure(
                cell=np.diag([12.0, 12.0, 12.0]),
                pbc=(True, True, True),
                species=species,
                positions=rng.uniform(0, 12, size=(n, 3)),
            )
            graph = neighbor_graph(s)
            for h in s.indices_of("H"):
                record = classify_h(s, graph, int(h))
                assert record.label in MOTIF_CLASSES

    def test_order_independence(self):
        rng = np.random.default_rng(29)
        n = 30
        species = list(rng.choice(["Al", "O", "H"], size=n))
        pos = rng.uniform(0, 10, size=(n, 3))
        s1 = AtomicStructure(
            cell=np.diag([10.0] * 3), pbc=(True,) * 3, species=tuple(species), positions=pos
        )
        order = rng.permutation(n)
        s2 = AtomicStructure(
            cell=np.diag([10.0] * 3),
            pbc=(True,) * 3,
            species=tuple(species[i] for i in order),
            positions=pos[order],
        )
        labels1 = sorted(r.label for r in classify_structure(s1, neighbor_graph(s1)))
        labels2 = sorted(r.label for r in classify_structure(s2, neighbor_graph(s2)))
        assert labels1 == labels2


class TestSurfaceFlag:
    def test_top_layer_h_is_surface(self):
        slab = make_oxide_slab(n_h=1)
        records = classify_structure(slab)
        assert len(records) == 1
        assert records[0].surface

    def test_buried_h_is_not_surface(self):
        # two O layers 3.2 A apart; H sits on the bottom layer
        species = ["Al", "O", "O", "H"]
        positions = [(0, 0, 0), (0, 0, 1.8), (0, 0, 5.0), (0.95, 0, 1.6)]
        s = make_molecule(species, positions)
        graph = neighbor_graph(s)
        region = oxide_region(s)
        surface = surface_sites(s, region, depth=2.0, bin_width=4.0)
        rec = classify_h(s, graph, 3, surface=surface)
        assert not rec.surface


class TestEnsembleStatistics:
    def _records(self, labels, surface=()):
        out = []
        for i, label in enumerate(labels):
            arity = {"Al-OH": ((1,), (2,)), "Al-OH-Al": ((1,), (2, 3))}
            host_o, host_al = arity.get(label, ((), ()))
            if label in ("Al-H",):
                host_o, host_al = (), (2,)
            out.append(
                MotifRecord(
                    h_index=i, label=label, host_o=host_o, host_al=host_al, surface=i in surface
                )
            )
        return out

    def test_single_sample_split(self):
        records = self._records(["Al-OH", "Al-OH", "Al-OH-Al", "Al-OH-Al"])
        stats = motif_statistics([records])
        assert stats.mean_pct["Al-OH"] == pytest.approx(50.0)
        assert stats.mean_pct["Al-OH-Al"] == pytest.approx(50.0)
        assert stats.std_pct["Al-OH"] == pytest.approx(0.0)

    def test_population_std_convention(self):
        stats = motif_statistics(
            [self._records(["Al-OH"]), self._records(["Al-OH-Al"])]
        )
        assert stats.mean_pct["Al-OH"] == pytest.approx(50.0)
        assert stats.std_pct["Al-OH"] == pytest.approx(50.0)

    def test_zero_h_samples_excluded(self):
        stats = motif_statistics([self._records(["Al-OH"]), [], []])
        assert stats.samples == 3
        assert stats.samples_with_h == 1
        assert stats.mean_pct["Al-OH"] == pytest.approx(100.0)

    def test_pooled_surface_probability(self):
        samples = [
            self._records(["Al-OH", "Al-OH"], surface={0}),
            self._records(["Al-OH", "Al-OH"], surface={0, 1}),
        ]
        stats = motif_statistics(samples)
        assert stats.surface_prob["Al-OH"] == pytest.approx(3 / 4)
        assert stats.surface_prob["Al-H"] is None

    def test_percentages_sum_to_100(self):
        rng = np.random.default_rng(31)
        samples = []
        for _ in range(20):
            labels = list(rng.choice(MOTIF_CLASSES, size=int(rng.integers(1, 12))))
            samples.append(self._records(labels))
        stats = motif_statistics(samples)
        assert sum(stats.mean_pct.values()) == pytest.approx(100.0, abs=1e-9)

    def test_generator_recovery(self):
        rng = np.random.default_rng(37)
        probs = np.array([0.37, 0.543, 0.054, 0.007, 0.013, 0.004, 0.006, 0.003, 0.0])
        probs = probs / probs.sum()
        n_samples, per_sample = 200, 20
        samples = []
        for _ in range(n_samples):
            counts = rng.multinomial(per_sample, probs)
            labels = [c for c, k in zip(MOTIF_CLASSES, counts) for _ in range(k)]
            samples.append(self._records(labels))
        stats = motif_statistics(samples)
        for label, p in zip(MOTIF_CLASSES, probs):
            se = stats.std_pct[label] / np.sqrt(n_samples)
            assert abs(stats.mean_pct[label] - 100 * p) <= 2 * se + 1e-9

    def test_requires_samples(self):
        with pytest.raises(ValueError):
            motif_statistics([])
