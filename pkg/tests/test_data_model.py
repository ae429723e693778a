import numpy as np
import pytest

from modbounds import strata
from modbounds.data_model import (
    AssumptionSet,
    ColumnSchema,
    Design,
    Monotonicity,
    ObservationRecord,
    StrataDistribution,
    infer_design,
    ingest_csv,
    tabulate,
)
from modbounds.errors import (
    EmptyData,
    InvalidStrata,
    MissingColumn,
    NonBinaryValue,
    RaggedCovariates,
)


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestIngest:
    def test_three_row_file(self, tmp_path):
        path = write_csv(
            tmp_path, "y,t,z,d\n1,1,1,1\n0,0,1,0\n1,0,0,1\n"
        )
        records = ingest_csv(path)
        assert len(records) == 3
        assert records[0] == ObservationRecord(y=1, t=1, z=1, d=1)
        assert infer_design([r.z for r in records]) is (
            Design.RANDOMIZED_PLACEMENT
        )

    def test_non_binary_value_names_row_and_column(self, tmp_path):
        rows = "\n".join(["1,1,1,1"] * 4 + ["1,1,1,2"])
        path = write_csv(tmp_path, f"y,t,z,d\n{rows}\n")
        with pytest.raises(NonBinaryValue) as err:
            ingest_csv(path)
        assert err.value.row == 5
        assert err.value.column == "d"

    def test_empty_covariate_mapping(self, tmp_path):
        path = write_csv(tmp_path, "y,t,z,d,age\n1,1,1,1,33\n")
        records = ingest_csv(path)
        assert records[0].x == ()

    def test_covariates_parsed_in_order(self, tmp_path):
        path = write_csv(tmp_path, "y,t,z,d,a,b\n1,1,1,1,0.5,-2\n")
        records = ingest_csv(path, ColumnSchema(x=("b", "a")))
        assert records[0].x == (-2.0, 0.5)

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path, "y,t,z\n1,1,1\n")
        with pytest.raises(MissingColumn):
            ingest_csv(path)

    def test_label_map(self, tmp_path):
        path = write_csv(tmp_path, "y,t,z,d\nyes,treated,1,0\n")
        schema = ColumnSchema(labels={"yes": 1, "treated": 1})
        assert ingest_csv(path, schema)[0] == ObservationRecord(1, 1, 1, 0)

    def test_unparseable_covariate(self, tmp_path):
        path = write_csv(tmp_path, "y,t,z,d,a\n1,1,1,1,oops\n")
        with pytest.raises(RaggedCovariates):
            ingest_csv(path, ColumnSchema(x=("a",)))


class TestTabulate:
    def test_counts_of_three_records(self):
        records = [
            ObservationRecord(1, 1, 1, 1),
            ObservationRecord(0, 0, 1, 0),
            ObservationRecord(1, 0, 0, 1),
        ]
        table = tabulate(records)
        assert table.n[1, 1, 1, 1] == 1
        assert table.n[0, 1, 0, 0] == 1
        assert table.n[0, 0, 1, 1] == 1
        assert table.total == 3
        assert table.design is Design.RANDOMIZED_PLACEMENT

    def test_all_post_is_post_only(self):
        records = [ObservationRecord(1, 1, 1, 1), ObservationRecord(0, 0, 1, 1)]
        assert tabulate(records).design is Design.POST_ONLY

    def test_empty_raises(self):
        with pytest.raises(EmptyData):
            tabulate([])

    def test_independent_recount_of_1000_records(self, rng):
        records = [
            ObservationRecord(
                y=int(rng.integers(2)),
                t=int(rng.integers(2)),
                z=int(rng.integers(2)),
                d=int(rng.integers(2)),
            )
            for _ in range(1000)
        ]
        table = tabulate(records)
        # second, independent tally via plain dict counting
        counts = {}
        for r in records:
            counts[(r.t, r.z, r.d, r.y)] = counts.get((r.t, r.z, r.d, r.y), 0) + 1
        for key, value in counts.items():
            assert table.n[key] == value
        assert table.total == 1000

    def test_permutation_invariance(self, rng):
        records = [
            ObservationRecord(
                y=int(rng.integers(2)),
                t=int(rng.integers(2)),
                z=int(rng.integers(2)),
                d=int(rng.integers(2)),
            )
            for _ in range(200)
        ]
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert np.array_equal(tabulate(records).n, tabulate(shuffled).n)
        assert tabulate(records).digest() == tabulate(shuffled).digest()


class TestAssumptionSet:
    def test_stability_requires_monotonicity(self):
        with pytest.raises(ValueError):
            AssumptionSet(stable_moderator_control=True)

    def test_attention_conflicts_with_positive_monotonicity(self):
        with pytest.raises(ValueError):
            AssumptionSet(
                moderator_monotonicity=Monotonicity.POSITIVE,
                attention_monotonicity=True,
            )

    def test_budgets_validated(self):
        with pytest.raises(ValueError):
            AssumptionSet(gamma=1.5)

    def test_allowed_strata(self):
        mono = AssumptionSet(moderator_monotonicity=Monotonicity.POSITIVE)
        assert mono.allowed_strata() == ("111", "110", "010", "100", "000")
        both = AssumptionSet(
            moderator_monotonicity=Monotonicity.POSITIVE,
            stable_moderator_control=True,
        )
        assert both.allowed_strata() == ("111", "100", "000")
        attention = AssumptionSet(
            attention_monotonicity=True, inattentive_exclusion=True
        )
        assert attention.allowed_strata() == (
            "111",
            "011",
            "101",
            "001",
            "000",
        )


class TestStrataDistribution:
    def test_rho_must_sum_to_one(self):
        with pytest.raises(InvalidStrata):
            StrataDistribution(rho={"111": 0.5, "000": 0.4})

    def test_psi_tables_must_normalize(self):
        psi = {
            s: {
                t: {1: {1: 0.5, 0: 0.0}, 0: {1: 0.0, 0: 0.4}}
                for t in (0, 1)
            }
            for s in strata.STRATA
        }
        with pytest.raises(InvalidStrata):
            StrataDistribution(
                rho={"111": 1.0}, psi=psi
            )

    def test_implied_probabilities_roundtrip(self, rng):
        from conftest import interior_qs, random_mu_distribution

        dist = random_mu_distribution(rng, list(strata.STRATA))
        assert interior_qs(dist)
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        qs = dist.q_values()
        assert probs.q_tz[1, 1] == pytest.approx(qs["q11"])
        assert probs.q_tz[0, 1] == pytest.approx(qs["q01"])
        assert probs.q0 == pytest.approx(qs["q0"])
        # P_t equals the Q-weighted average of the cell probabilities
        for t in (0, 1):
            mixed = probs.p_tzd[t, 1, 1] * probs.q_tz[t, 1] + probs.p_tzd[
                t, 1, 0
            ] * (1 - probs.q_tz[t, 1])
            assert probs.p_t[t] == pytest.approx(mixed)
