# ==================================================================================================================== #
#                                                                                                                      #
# pyCalibratedBootstrap                                                                                                #
# Calibrated m-out-of-n bootstrap inference for parametric models                                                      #
#                                                                                                                      #
# ==================================================================================================================== #
# Authors:                                                                                                             #
#   pyCalibratedBootstrap contributors                                                                                 #
#                                                                                                                      #
# License:                                                                                                             #
# ==================================================================================================================== #
# Copyright 2024-2026 pyCalibratedBootstrap contributors                                                               #
#                                                                                                                      #
# Licensed under the Apache License, Version 2.0 (the "License");                                                      #
# you may not use this file except in compliance with the License.                                                     #
# You may obtain a copy of the License at                                                                              #
#                                                                                                                      #
#   http://www.apache.org/licenses/LICENSE-2.0                                                                         #
#                                                                                                                      #
# Unless required by applicable law or agreed to in writing, software                                                  #
# distributed under the License is distributed on an "AS IS" BASIS,                                                    #
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.                                             #
# See the License for the specific language governing permissions and                                                  #
# limitations under the License.                                                                                       #
#                                                                                                                      #
# SPDX-License-Identifier: Apache-2.0                                                                                  #
# ==================================================================================================================== #
#
"""Application testcases running every scenario end to end at small scale."""
from csv            import reader as csv_reader
from importlib.util import find_spec
from json           import loads
from os             import environ
from pathlib        import Path
from typing         import Any, Dict
from unittest       import TestCase, skipUnless

from pyCalibratedBootstrap.Harness           import ScenarioConfig
from pyCalibratedBootstrap.Harness.Data      import ExportDiabetes
from pyCalibratedBootstrap.Harness.Scenarios import RunScenario
from pyCalibratedBootstrap.MathKit           import ChiSquareQuantile


if __name__ == "__main__": # pragma: no cover
	print("ERROR: you called a testcase declaration file as an executable module.")
	print("Use: 'python -m unitest <testcase module>'")
	exit(1)


_OUTPUT = Path("tests/output/Scenarios")
_ACCEPTANCE = environ.get("CB_ACCEPTANCE", "") not in ("", "0")


def _Run(scenario: str, directory: str, **overrides: Any) -> Dict[str, Any]:
	config = ScenarioConfig.Resolve(scenario, overrides={"out": str(_OUTPUT / directory), **overrides}, environment={})
	RunScenario(config)
	return loads((config.OutputDirectory / "report.json").read_text(encoding="utf-8"))


def _Report(document: Dict[str, Any], method: str, path: str) -> Dict[str, Any]:
	for report in document["results"]["reports"]:
		if report["method"] == method and report["path"] == path:
			return report
	raise KeyError(f"No report for method '{method}' on path '{path}'.")


def _CSVRows(path: Path):
	with path.open("r", encoding="utf-8", newline="") as file:
		return list(csv_reader(file))


class MeanSimple(TestCase):
	def test_Desk(self) -> None:
		document = _Run("mean-simple", "MeanSimple", seed=1, n=30, T=20, B=4, pool_size=60, n_mc=20)

		cb = _Report(document, "cb", "per-alpha-pool")["intervals"]["theta"][0]
		theory = _Report(document, "theoretical", "baseline")["intervals"]["theta"][0]
		mean = document["results"]["sample_mean"]

		print()
		print(f"Statistics:")
		print(f"  cb:          ({cb['lower']:.3f}, {cb['upper']:.3f})")
		print(f"  theoretical: ({theory['lower']:.3f}, {theory['upper']:.3f})")

		self.assertEqual(1, document["schema_version"])
		self.assertLess(cb["lower"], mean)
		self.assertGreater(cb["upper"], mean)
		self.assertEqual(20, len(_CSVRows(_OUTPUT / "MeanSimple" / "trace.csv")) - 1)

	def test_Reproducible(self) -> None:
		first = _Run("mean-simple", "Reproducible1", seed=5, n=20, T=10, B=3, pool_size=20, n_mc=10)
		second = _Run("mean-simple", "Reproducible2", seed=5, n=20, T=10, B=3, pool_size=20, n_mc=10, threads=3)

		self.assertEqual(first["config_digest"], second["config_digest"])
		self.assertEqual(first["results"], second["results"])

	@skipUnless(_ACCEPTANCE, "Full-scale acceptance runs are enabled by CB_ACCEPTANCE=1.")
	def test_Acceptance(self) -> None:
		document = _Run("mean-simple", "MeanSimpleAcceptance", seed=1)

		cb = _Report(document, "cb", "per-alpha-pool")["intervals"]["theta"][0]
		contourOrder = _Report(document, "cb-contour-order", "per-alpha-pool")["intervals"]["theta"][0]
		theory = _Report(document, "theoretical", "baseline")["intervals"]["theta"][0]

		self.assertAlmostEqual(theory["lower"], cb["lower"], delta=0.06)
		self.assertAlmostEqual(theory["upper"], cb["upper"], delta=0.06)
		self.assertAlmostEqual(cb["lower"], contourOrder["lower"], delta=0.03)
		self.assertAlmostEqual(cb["upper"], contourOrder["upper"], delta=0.03)


class SoftThresholdMean(TestCase):
	def test_Desk(self) -> None:
		document = _Run(
			"softthresh-mean", "SoftThresholdMean", seed=2, n=40, alpha_set="0.1,0.5,0.9", T=15, B=4, pool_size=40,
			emit_contour_histogram=True
		)
		results = document["results"]

		self.assertEqual(3 * 15, results["pool_size"])
		self.assertGreaterEqual(results["pool_u_min"], 0.0)
		self.assertLessEqual(results["pool_u_max"], 1.0)
		self.assertTrue((_OUTPUT / "SoftThresholdMean" / "histogram.csv").exists())
		self.assertIn("theta", _Report(document, "cb", "refined-sample")["intervals"])


class LinearRegression(TestCase):
	def test_Joint(self) -> None:
		document = _Run("lr-joint", "LRJoint", seed=3, n=40, p=4, alpha="0.1,0.5", alpha_set="0.1,0.5", T=10, B=4, pool_size=50)
		results = document["results"]
		truth = _Report(document, "truth", "baseline")["thresholds"]

		self.assertAlmostEqual(ChiSquareQuantile(0.9, 4) / 4, truth[0]["q"])
		self.assertSetEqual(
			{"cb", "standard_bootstrap", "residual_bootstrap", "parametric_gaussian", "parametric_t", "oracle"},
			set(results["qq_max_relative_error"])
		)
		qq = _CSVRows(_OUTPUT / "LRJoint" / "qq.csv")
		self.assertEqual(1 + 6 * 99, len(qq))

	def test_JointUnknownSigma(self) -> None:
		document = _Run("lr-joint", "LRJointUnknown", seed=4, n=40, p=4, sigma="unknown", alpha="0.1", alpha_set="0.1,0.5", T=8, B=3, pool_size=30)

		self.assertIn(
			"Noise level is estimated; the oracle is the scaled F-type distribution.",
			document["notes"]
		)

	def test_Marginal(self) -> None:
		document = _Run("lr-marginal", "LRMarginal", seed=5, n=40, p=4, alpha="0.1", alpha_set="0.1,0.5", T=10, B=4, pool_size=50, reps=2)
		coverage = _CSVRows(_OUTPUT / "LRMarginal" / "coverage.csv")

		interval = _Report(document, "cb", "refined-sample")["intervals"]["beta_1"][0]
		self.assertLess(interval["lower"], document["results"]["estimate"])
		self.assertGreater(interval["upper"], document["results"]["estimate"])
		# 6 sampling methods plus the theoretical interval, at one level
		self.assertEqual(1 + 7, len(coverage))
		self.assertTrue(all(row[-1] == "2" for row in coverage[1:]))

	@skipUnless(_ACCEPTANCE, "Full-scale acceptance runs are enabled by CB_ACCEPTANCE=1.")
	def test_JointAcceptance(self) -> None:
		document = _Run("lr-joint", "LRJointAcceptance", seed=7, n=500, kappa=0.3, B=100, pool_size=2000)
		cb = {row["alpha"]: row["q"] for row in _Report(document, "cb", "refined-sample")["thresholds"]}
		oracle = {row["alpha"]: row["q"] for row in _Report(document, "oracle", "baseline")["thresholds"]}
		truth = {row["alpha"]: row["q"] for row in _Report(document, "truth", "baseline")["thresholds"]}

		self.assertAlmostEqual(truth[0.05], cb[0.05], delta=0.05)
		self.assertAlmostEqual(truth[0.05], oracle[0.05], delta=0.02 * truth[0.05])


class Lasso(TestCase):
	def test_Simulation(self) -> None:
		document = _Run("lasso-sim", "LassoSim", seed=6, n=30, p=5, reps=2, alpha="0.1", alpha_set="0.1,0.5", T=8, B=3, pool_size=20)
		settings = document["results"]["settings"]
		methods = {row[2] for row in _CSVRows(_OUTPUT / "LassoSim" / "coverage.csv")[1:]}

		self.assertEqual(1, len(settings))
		self.assertEqual(2, settings[0]["reps"])
		self.assertIn("cb", methods)
		self.assertIn("residual (non-debiased)", methods)

	def test_Diabetes(self) -> None:
		document = _Run(
			"lasso-diabetes", "LassoDiabetes", seed=7, data="tests/data/Harness/Small.csv", **{"lambda": 1.0},
			alpha="0.1", alpha_set="0.1,0.5", T=6, B=3, pool_size=20
		)
		results = document["results"]

		self.assertEqual(12, results["n"])
		self.assertGreater(len(results["selected"]), 0)
		self.assertEqual(len(results["selected"]), len(results["variables"]))

	@skipUnless(find_spec("sklearn") is not None, "Exporting the diabetes data needs scikit-learn.")
	def test_DiabetesAcceptance(self) -> None:
		path = _OUTPUT / "DiabetesData" / "diabetes.csv"
		ExportDiabetes(path)

		document = _Run("lasso-diabetes", "LassoDiabetesAcceptance", seed=7, data=str(path))
		results = document["results"]
		s6 = next(row for row in results["variables"] if row["name"] == "s6")

		self.assertEqual(442, results["n"])
		self.assertEqual(["sex", "bmi", "map", "s1", "s3", "s5", "s6"], results["selected"])
		self.assertTrue(all(interval["cb_contains_zero"] for interval in s6["intervals"]))


class VonMises(TestCase):
	def test_Desk(self) -> None:
		document = _Run("vonmises-dr", "VonMises", seed=8, grid_size=64, n_mc=30, pool_size=200)
		cdf = document["results"]["cdf"]

		print()
		for row in cdf:
			print(f"  theta={row['theta']:.1f}: dr={row['dr']:.3f}   fiducial={row['fiducial_resultant']:.3f}")

		self.assertEqual(9, document["results"]["n"])
		self.assertEqual(6, len(cdf))
		for row in cdf:
			self.assertAlmostEqual(row["fiducial_resultant"], row["dr"], delta=0.25)
