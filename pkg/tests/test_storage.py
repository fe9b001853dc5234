import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gromov_lab.core.errors import (
    ConfigInvalid,
    FileFormatError,
    LabFileNotFound,
    NotACorrespondence,
    TriangleViolation,
)
from gromov_lab.core.random import Lcg64
from gromov_lab.schemas.experiment import ExperimentKind
from gromov_lab.schemas.report import LatticeReport, LatticeRow, RunManifest
from gromov_lab.services.correspondences import Correspondence
from gromov_lab.services.gh_solver import gh_exact
from gromov_lab.services.metric_core import (
    FiniteMetricSpace,
    PointSet1D,
    arithmetic_progression,
    from_reals,
    l1_product,
    random_space,
)
from gromov_lab.storage.files import (
    atomic_write_text,
    dumps_certificate,
    dumps_matrix,
    loads_certificate,
    loads_correspondence,
    loads_experiment_config,
    loads_matrix,
    read_correspondence,
    read_experiment_config,
    read_matrix,
    write_correspondence,
)
from gromov_lab.storage.reports import lattice_csv, manifest_text, records_to_csv
from tests.strategies import reals


class TestMatrixFiles:
    def test_round_trip_at_twelve_digits(self, matrix_file):
        space = random_space(Lcg64(12), 5)
        back = read_matrix(matrix_file(space))
        assert back.labels == space.labels
        np.testing.assert_allclose(back.dist, space.dist, rtol=1e-11, atol=0)

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(min_value=0, max_value=1e6), min_size=1, max_size=5, unique=True),
        st.lists(st.floats(min_value=0, max_value=1e6), min_size=1, max_size=3, unique=True),
    )
    def test_large_collinear_products_read_back(self, first, second):
        space = l1_product(
            from_reals(PointSet1D(tuple(sorted(first)))),
            from_reals(PointSet1D(tuple(sorted(second)))),
        )
        back = loads_matrix(dumps_matrix(space))
        np.testing.assert_allclose(back.dist, space.dist, rtol=1e-11, atol=0)

    def test_separated_set_product_reads_back(self, matrix_file):
        separated = from_reals(arithmetic_progression(3, 1000))
        space = l1_product(separated, reals(0, 0.123456789, 0.987654321))
        assert read_matrix(matrix_file(space)).size == 9

    @pytest.mark.parametrize("label", ["a b", "", " a", "tab\tlabel"])
    def test_labels_with_whitespace_are_rejected(self, label):
        space = FiniteMetricSpace(labels=(label, "c"), dist=np.array([[0.0, 1.0], [1.0, 0.0]]))
        with pytest.raises(FileFormatError):
            dumps_matrix(space)

    def test_text_layout(self, unit_pair):
        assert dumps_matrix(unit_pair) == "2\np0 p1\n0 1\n1 0\n"

    def test_blank_lines_are_ignored(self):
        space = loads_matrix("\n2\na b\n\n0 2\n2 0\n\n")
        assert space.labels == ("a", "b")
        assert space.d(0, 1) == 2

    def test_axioms_are_checked(self, bad_matrix_file):
        with pytest.raises(TriangleViolation):
            read_matrix(bad_matrix_file)

    @pytest.mark.parametrize(
        "text",
        ["", "x\n", "2\na b\n0 1\n", "2\na\n0 1\n1 0\n", "2\na b\n0 z\n1 0\n", "2\na b\n0 1 2\n1 0\n"],
    )
    def test_malformed(self, text):
        with pytest.raises(FileFormatError):
            loads_matrix(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(LabFileNotFound) as info:
            read_matrix(tmp_path / "nope.mat")
        assert "nope.mat" in info.value.detail


class TestCorrespondenceFiles:
    def test_round_trip(self, tmp_path):
        corr = Correspondence(((0, 0), (1, 0), (2, 1)), 3, 2)
        path = write_correspondence(corr, tmp_path / "r.txt")
        assert path.read_text() == "3 2\n0 0\n1 0\n2 1\n"
        assert read_correspondence(path) == corr

    def test_must_cover_both_sides(self):
        with pytest.raises(NotACorrespondence):
            loads_correspondence("2 2\n0 0\n1 0\n")

    def test_malformed(self):
        with pytest.raises(FileFormatError):
            loads_correspondence("2 2\n0\n")


class TestCertificates:
    def test_round_trip(self):
        rng = Lcg64(6)
        cert = gh_exact(random_space(rng, 3), random_space(rng, 2))
        back = loads_certificate(dumps_certificate(cert))
        assert back == cert

    def test_header(self, unit_pair):
        text = dumps_certificate(gh_exact(unit_pair, unit_pair))
        assert text.splitlines()[:2] == ["value 0.0", "lower_proof DiameterBound"]

    def test_malformed(self):
        with pytest.raises(FileFormatError):
            loads_certificate("value x\n")


class TestExperimentConfigs:
    def test_parse(self):
        config = loads_experiment_config(
            "# lattice run\nname = lat\nkind = LatticeRatio\nseed = 4\n"
            "n = 2\nlambda = 3/2   # rational\nc = 0\nts = 1,2,3\n"
        )
        assert config.name == "lat"
        assert config.kind is ExperimentKind.LATTICE_RATIO
        assert config.seed == 4
        assert config.parameters["lambda"] == "3/2"
        assert config.get_floats("ts") == [1.0, 2.0, 3.0]

    def test_ranges(self):
        config = loads_experiment_config("name = w\nkind = LatticeWitness\nn=1\nlambda=2\nc=3\ngrid=1..4\n")
        assert config.get_floats("grid") == [1.0, 2.0, 3.0, 4.0]
        assert config.seed == 0

    def test_missing_parameter_names_the_key(self):
        with pytest.raises(ConfigInvalid) as info:
            loads_experiment_config("name = lat\nkind = LatticeRatio\nn = 2\nc = 0\nts = 1\n")
        assert info.value.key == "lambda"
        assert "lambda" in info.value.detail
        assert info.value.exit_code == 2

    @pytest.mark.parametrize(
        "text,key",
        [
            ("kind = LatticeRatio\n", "name"),
            ("name = a\n", "kind"),
            ("name = a\nkind = Nope\n", "kind"),
            ("name = a\nkind = ProductUpper\ntrials = 1\nseed = x\n", "seed"),
            ("name = a\njust words\n", "line 2"),
        ],
    )
    def test_invalid(self, text, key):
        with pytest.raises(ConfigInvalid) as info:
            loads_experiment_config(text)
        assert info.value.key == key

    def test_typed_getters(self):
        config = loads_experiment_config("name = p\nkind = ProductUpper\ntrials = three\n")
        with pytest.raises(ConfigInvalid):
            config.get_int("trials")
        assert config.get_int("dim", 2) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(LabFileNotFound):
            read_experiment_config(tmp_path / "absent.cfg")


class TestReports:
    def test_csv_format(self):
        body = records_to_csv([{"a": 1, "b": None}, {"a": 2, "b": 0.5}], ["a", "b"])
        assert body == "a,b\n1,\n2,0.5\n"

    def test_lattice_footer(self):
        report = LatticeReport(
            n=1, lam=2, c=3,
            rows=[LatticeRow(t=1, N=5, Nprime=5, ratio=1.0), LatticeRow(t=2, N=9, Nprime=7, ratio=9 / 7)],
            witness_t=2.0,
        )
        lines = lattice_csv(report).splitlines()
        assert lines[0] == "t,N,Nprime,ratio"
        assert lines[-1] == "witness_t,2.0,,"

    def test_witness_must_be_strict(self):
        with pytest.raises(ValueError):
            LatticeReport(n=1, lam=2, c=3, rows=[LatticeRow(t=1, N=5, Nprime=5)], witness_t=1.0)

    def test_manifest(self):
        manifest = RunManifest(
            name="demo", kind="LatticeRatio", seed=1, config={"n": "2"},
            versions={"gromov_lab": "0.1.0"}, wall_time_s=0.25, exit_status=0,
            outputs=("reports/demo.csv",),
        )
        text = manifest_text(manifest)
        assert "exit_status: 0" in text
        assert "n = 2" in text
        assert text.endswith("reports/demo.csv\n")

    def test_atomic_write_creates_parents(self, tmp_path):
        path = atomic_write_text(tmp_path / "a" / "b.csv", "x\n")
        assert path.read_text() == "x\n"
        assert list(path.parent.iterdir()) == [path]

    def test_csv_reads_back(self, tmp_path):
        path = atomic_write_text(tmp_path / "t.csv", records_to_csv([{"k": 1, "v": 0.1}], ["k", "v"]))
        frame = pd.read_csv(path)
        assert frame["v"].tolist() == [0.1]
