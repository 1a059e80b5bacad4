import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA_DIR
from fairdelta.data import Dataset, SplitSpec, dump_encoded, load_dataset, load_schema, split
from fairdelta.errors import DataError, ValidationError

BOOL_SCHEMA = """\
[dataset]
task = logistic_loss
target = y
sensitive = s
default_kind = numeric
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def toy(n, seed=0, d=2):
    rng = np.random.default_rng(seed)
    s = np.zeros(n, dtype=bool)
    s[: max(1, n // 3)] = True
    return Dataset(features=rng.random((n, d)), sensitive=s, target=rng.random(n),
                   feature_names=[f"f{i}" for i in range(d)], task_kind="square_loss")


class TestLoad:
    def test_two_rows(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s,y\n3,true,1\n5,false,0\n")
        ds = load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))
        np.testing.assert_array_equal(ds.target, [1.0, 0.0])
        np.testing.assert_array_equal(ds.sensitive, [True, False])
        np.testing.assert_array_equal(ds.features[:, 0], [0.0, 1.0])

    def test_one_hot(self, tmp_path):
        csv = write(tmp_path, "d.csv",
                    "c,s,y\nred,1,0.1\nblue,0,0.2\ngreen,1,0.3\nred,0,0.4\nblue,1,0.5\n")
        schema = write(tmp_path, "s.ini", BOOL_SCHEMA + "\n[columns]\nc = categorical\n")
        ds = load_dataset(csv, schema)
        assert ds.feature_names == ("c=blue", "c=green", "c=red")
        expected = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0]], dtype=float)
        np.testing.assert_array_equal(ds.features, expected)
        np.testing.assert_array_equal(ds.features.sum(axis=1), 1.0)
        np.testing.assert_allclose(ds.target, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)

    def test_synthetic(self, synthetic_csv, synthetic_schema):
        ds = load_dataset(synthetic_csv, synthetic_schema)
        assert len(ds) == 400
        assert ds.feature_names == ("x1", "x2", "color=blue", "color=green", "color=red")
        assert ds.features.min() == 0.0 and ds.features.max() == 1.0
        assert ds.target.min() == 0.0 and ds.target.max() == 1.0
        assert ds.task_kind == "square_loss"

    def test_missing_rows_dropped(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s,y\n1,1,0\n?,0,1\n2,0,1\n3,1,0.5\n")
        ds = load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))
        assert len(ds) == 3

    def test_sparse_column_dropped(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,z,s,y\n1,?,1,0\n2,?,0,1\n3,5,1,0.5\n")
        schema = write(tmp_path, "s.ini", BOOL_SCHEMA + "max_missing_fraction = 0.5\n")
        ds = load_dataset(csv, schema)
        assert ds.feature_names == ("x",) and len(ds) == 3

    def test_rules(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,g,inc\n1,M,>50K.\n2,F,<=50K\n3,M,<=50K.\n")
        schema = write(tmp_path, "s.ini", """\
[dataset]
task = logistic_loss
target = inc
target_rule = == >50K
sensitive = g
sensitive_rule = == M
strip = .
default_kind = numeric
""")
        ds = load_dataset(csv, schema)
        np.testing.assert_array_equal(ds.target, [1, 0, 0])
        np.testing.assert_array_equal(ds.sensitive, [True, False, True])

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_dataset(tmp_path / "nope.csv", write(tmp_path, "s.ini", BOOL_SCHEMA))

    def test_absent_columns(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s\n1,1\n2,0\n")
        with pytest.raises(DataError):
            load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))

    def test_too_few_rows(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s,y\n1,1,0\n?,0,1\n")
        with pytest.raises(DataError):
            load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))

    def test_constant_target(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s,y\n1,1,0.4\n2,0,0.4\n")
        with pytest.raises(DataError):
            load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))

    def test_single_group(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s,y\n1,1,0\n2,1,1\n")
        with pytest.raises(DataError):
            load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))

    def test_non_boolean_sensitive(self, tmp_path):
        csv = write(tmp_path, "d.csv", "x,s,y\n1,a,0\n2,b,1\n")
        with pytest.raises(DataError):
            load_dataset(csv, write(tmp_path, "s.ini", BOOL_SCHEMA))

    def test_dump(self, tmp_path, synthetic_csv, synthetic_schema):
        ds = load_dataset(synthetic_csv, synthetic_schema)
        dump_encoded(ds, tmp_path / "enc.csv")
        df = pd.read_csv(tmp_path / "enc.csv", float_precision="round_trip")
        assert list(df.columns) == ["row_id", *ds.feature_names, "sensitive", "target"]
        np.testing.assert_array_equal(df["target"].to_numpy(), ds.target)


class TestSchema:
    def test_bundled(self):
        for name in ("adult", "communities", "law_school"):
            assert load_schema(name).name == name
        assert len(load_schema("communities").names) == 128

    def test_unknown(self):
        with pytest.raises(FileNotFoundError):
            load_schema("no-such-schema")

    def test_bad_kind(self, tmp_path):
        with pytest.raises(ValidationError):
            load_schema(write(tmp_path, "s.ini", BOOL_SCHEMA + "[columns]\nx = ordinal\n"))

    def test_missing_key(self, tmp_path):
        with pytest.raises(ValidationError):
            load_schema(write(tmp_path, "s.ini", "[dataset]\ntask = square_loss\ntarget = y\n"))


class TestSplit:
    def test_counts(self):
        train, test, idx = split(toy(10), SplitSpec(0.5, 3, seed=1))
        assert len(train) == 5 and len(test) == 5
        assert len(set(idx.tolist())) == 3

    def test_deterministic(self):
        ds = toy(50)
        a = split(ds, SplitSpec(0.5, 10, seed=7))
        b = split(ds, SplitSpec(0.5, 10, seed=7))
        assert a[2].tobytes() == b[2].tobytes()
        assert a[0].row_ids.tobytes() == b[0].row_ids.tobytes()

    def test_large(self):
        _, test, idx = split(toy(2000), SplitSpec(0.5, 1000, seed=3))
        assert len(test) == 1000
        assert idx.size == 1000 and np.unique(idx).size == 1000 and idx.max() < 1000

    def test_seed_changes_partition(self):
        ds = toy(100)
        ref = split(ds, SplitSpec(0.5, 10, seed=0))[0].row_ids
        assert any(not np.array_equal(split(ds, SplitSpec(0.5, 10, seed=s))[0].row_ids, ref)
                   for s in range(1, 6))

    def test_sample_too_large(self):
        with pytest.raises(ValidationError):
            split(toy(10), SplitSpec(0.5, 6))

    def test_bad_spec(self):
        for kw in ({"train_fraction": 0.0}, {"train_fraction": 1.0},
                   {"comparison_sample_size": 0}, {"seed": -1}):
            with pytest.raises(ValidationError):
                SplitSpec(**kw)


@settings(max_examples=60)
@given(st.integers(4, 200), st.floats(0.05, 0.95), st.integers(0, 2 ** 64 - 1))
def test_split_partitions_rows(n, frac, seed):
    ds = toy(n)
    n_train = int(np.floor(frac * n + 0.5))
    if n_train in (0, n):
        return
    train, test, idx = split(ds, SplitSpec(frac, 1, seed))
    assert len(train) == n_train
    both = np.concatenate([train.row_ids, test.row_ids])
    np.testing.assert_array_equal(np.sort(both), ds.row_ids)
    rebuilt = np.concatenate([train.features, test.features])
    np.testing.assert_array_equal(rebuilt[np.argsort(both)], ds.features)


@settings(max_examples=30, deadline=None)
@given(st.permutations(list(range(12))))
def test_encoding_order_independent(tmp_path_factory, perm):
    tmp = tmp_path_factory.mktemp("perm")
    colors = ["red", "blue", "green", "blue"] * 3
    rows = [f"{i * 0.5},{colors[i]},{i % 2},{(i * 7) % 5}" for i in range(12)]
    schema = write(tmp, "s.ini", BOOL_SCHEMA + "[columns]\nc = categorical\n")
    a = load_dataset(write(tmp, "a.csv", "x,c,s,y\n" + "\n".join(rows) + "\n"), schema)
    b = load_dataset(write(tmp, "b.csv", "x,c,s,y\n" + "\n".join(rows[i] for i in perm) + "\n"),
                     schema)
    np.testing.assert_array_equal(b.features, a.features[perm])
    np.testing.assert_array_equal(b.target, a.target[perm])
    np.testing.assert_array_equal(b.sensitive, a.sensitive[perm])


@pytest.mark.skipif(not (DATA_DIR / "adult" / "adult.data").is_file(), reason="adult data absent")
def test_adult_shape():
    ds = load_dataset(DATA_DIR / "adult", "adult")
    assert len(ds) == 45222
    assert ds.task_kind == "logistic_loss"
    assert 0.2 < ds.target.mean() < 0.3
    assert 0.6 < ds.sensitive.mean() < 0.7
