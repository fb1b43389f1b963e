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
"""Testcases for confidence regions, intervals, baseline bootstraps and oracles."""
from unittest import TestCase

from numpy         import array, allclose, arange, eye, cov, zeros
from numpy.linalg  import inv
from numpy.random  import default_rng

from pyCalibratedBootstrap.MathKit   import RngStream, DomainError, DesignMatrix, ChiSquareQuantile
from pyCalibratedBootstrap.Models    import Dataset, GaussianMeanModel, LinearRegressionModel, LassoModel
from pyCalibratedBootstrap.Calibrate import CandidateDraw
from pyCalibratedBootstrap.Refine    import EmptyPoolError
from pyCalibratedBootstrap.Inference import SampleMethod, CandidatePool, EmpiricalQuantile, QuadraticFormStatistic
from pyCalibratedBootstrap.Inference import AbsoluteDeviationStatistic, JointRegionThreshold, MarginalInterval
from pyCalibratedBootstrap.Inference import LossOrderInterval, ContourOrderThreshold, ContourOrderInterval, StandardBootstrap
from pyCalibratedBootstrap.Inference import ResidualBootstrap, ParametricBootstrap, FiducialOracleSample
from pyCalibratedBootstrap.Inference import ScaledChiSquareQuantile, FTypeQuantile, HalfNormalQuantile, NormalOracleQuantile
from pyCalibratedBootstrap.Inference import JointCovered, MarginalCovered, InferenceReport


if __name__ == "__main__": # pragma: no cover
	print("ERROR: you called a testcase declaration file as an executable module.")
	print("Use: 'python -m unitest <testcase module>'")
	exit(1)


def _RegressionData(n: int = 60, p: int = 3, seed: int = 1) -> Dataset:
	rng = default_rng(seed)
	x = DesignMatrix(rng.standard_normal((n, p)))
	return Dataset(x.Entries @ array([3.0] + [0.0] * (p - 1)) + rng.standard_normal(n), x)


class Quantiles(TestCase):
	def test_Empirical(self) -> None:
		values = arange(1.0, 11.0)

		self.assertEqual(9.0, EmpiricalQuantile(values, 0.9))
		self.assertEqual(10.0, EmpiricalQuantile(values, 0.91))
		self.assertEqual(1.0, EmpiricalQuantile(values, 0.0))
		self.assertEqual(10.0, EmpiricalQuantile(values, 1.0))
		self.assertEqual(3.0, EmpiricalQuantile([3.0], 0.5))

	def test_Empirical_Invalid(self) -> None:
		with self.assertRaises(EmptyPoolError):
			EmpiricalQuantile([], 0.5)
		with self.assertRaises(ValueError):
			EmpiricalQuantile([1.0], 1.5)


class Statistics(TestCase):
	def test_QuadraticForm(self) -> None:
		statistic = QuadraticFormStatistic(zeros(2), eye(2), scale=2.0)

		self.assertAlmostEqual(1.0, statistic(array([1.0, 1.0])))
		# extra trailing components (e.g. a noise level) are ignored
		self.assertTrue(allclose([1.0, 0.0], statistic.Values(array([[1.0, 1.0, 9.0], [0.0, 0.0, 9.0]]))))

		with self.assertRaises(ValueError):
			QuadraticFormStatistic(zeros(2), eye(2), scale=0.0)

	def test_AbsoluteDeviation(self) -> None:
		statistic = AbsoluteDeviationStatistic(array([1.0, 2.0]), 1)

		self.assertEqual(2.0, statistic.Center)
		self.assertEqual(0.5, statistic(array([0.0, 1.5])))


class Regions(TestCase):
	def test_JointThreshold(self) -> None:
		thetas = array([[float(i), 0.0] for i in range(1, 21)])
		pool = CandidatePool(thetas, zeros(2), SampleMethod.StandardBootstrap)
		statistic = QuadraticFormStatistic(zeros(2), eye(2))

		# 19th of the squares 1, 4, ..., 400
		self.assertEqual(361.0, JointRegionThreshold(pool, statistic, 0.05))
		self.assertTrue(JointCovered(statistic, 361.0, array([19.0, 0.0])))
		self.assertFalse(JointCovered(statistic, 361.0, array([19.0, 1.0])))

		with self.assertRaises(DomainError):
			JointRegionThreshold(pool, statistic, 0.0)

	def test_MarginalInterval(self) -> None:
		thetas = array([[1.0 + d] for d in (-0.4, -0.2, 0.1, 0.3, 0.5)])
		pool = CandidatePool(thetas, array([1.0]), SampleMethod.StandardBootstrap)
		lower, upper = MarginalInterval(pool, 0, 0.2)

		self.assertAlmostEqual(0.6, lower)
		self.assertAlmostEqual(1.4, upper)
		self.assertTrue(MarginalCovered((lower, upper), 1.39))
		self.assertFalse(MarginalCovered((lower, upper), 1.41))

	def test_MarginalInterval_NeedsCenter(self) -> None:
		draws = [CandidateDraw(array([1.0]), 5, -0.1, 0.5, 0.0)]

		with self.assertRaises(ValueError):
			MarginalInterval(draws, 0, 0.1)
		self.assertTupleEqual((1.0, 1.0), MarginalInterval(draws, 0, 0.1, center=array([1.0])))

	def test_LossOrder(self) -> None:
		pool = [CandidateDraw(array([theta]), 10, -0.1, 0.5, loss) for theta, loss in ((0.8, 1.0), (1.3, 2.0), (0.5, 9.0), (1.0, 0.5))]
		self.assertTupleEqual((0.8, 1.3), LossOrderInterval(pool, 0.25))

	def test_ContourOrder(self) -> None:
		pool = [CandidateDraw(array([theta]), 10, -0.1, u, 0.0) for theta, u in ((0.8, 0.9), (1.3, 0.3), (0.5, 0.01), (1.1, 0.6))]

		self.assertEqual(0.3, ContourOrderThreshold(pool, 0.5))
		self.assertTupleEqual((0.8, 1.3), ContourOrderInterval(pool, 0.5))

	def test_EmptyPool(self) -> None:
		with self.assertRaises(EmptyPoolError):
			LossOrderInterval([], 0.1)
		with self.assertRaises(EmptyPoolError):
			ContourOrderThreshold([], 0.1)


class Baselines(TestCase):
	def test_StandardBootstrap(self) -> None:
		data = Dataset(default_rng(2).standard_normal(30))
		pool = StandardBootstrap(GaussianMeanModel(), data, 40, RngStream(3))

		self.assertEqual(40, len(pool))
		self.assertEqual(SampleMethod.StandardBootstrap, pool.Method)
		self.assertEqual("standard_bootstrap", pool.Label)
		self.assertAlmostEqual(float(data.Y.mean()), float(pool.Center[0]))

	def test_ResidualBootstrap(self) -> None:
		data = _RegressionData()
		linear = ResidualBootstrap(LinearRegressionModel(sigma=1.0), data, 20, RngStream(4))
		lasso = ResidualBootstrap(LassoModel(5.0, 1.0), data, 20, RngStream(4))

		self.assertEqual("residual_bootstrap", linear.Label)
		self.assertEqual("residual (non-debiased)", lasso.Label)
		self.assertTupleEqual((20, 3), lasso.Thetas.shape)

		with self.assertRaises(TypeError):
			ResidualBootstrap(GaussianMeanModel(), Dataset([0.0, 1.0]), 5, RngStream(4))
		with self.assertRaises(EmptyPoolError):
			ResidualBootstrap(LinearRegressionModel(sigma=1.0), data, 0, RngStream(4))

	def test_ParametricBootstrap(self) -> None:
		data = _RegressionData()
		gaussian = ParametricBootstrap(LinearRegressionModel(sigma=1.0), data, 25, "gaussian", RngStream(5))
		student = ParametricBootstrap(LinearRegressionModel(sigma=1.0), data, 25, "student_t", RngStream(5))

		self.assertEqual(SampleMethod.ParametricGaussian, gaussian.Method)
		self.assertEqual(SampleMethod.ParametricT, student.Method)

		with self.assertRaises(ValueError):
			ParametricBootstrap(LinearRegressionModel(sigma=1.0), data, 25, "cauchy", RngStream(5))

	def test_FiducialOracle(self) -> None:
		data = _RegressionData(n=80)
		sample = FiducialOracleSample(data, 6000, 1.0, RngStream(6))
		covariance = cov(sample.Thetas, rowvar=False)
		expected = inv(data.X.Gram)

		print()
		print(f"Statistics:")
		print(f"  Max covariance error: {abs(covariance - expected).max():.2e}")

		self.assertEqual(SampleMethod.Oracle, sample.Method)
		self.assertTrue(allclose(expected, covariance, atol=0.15 * abs(expected).max()))

		with self.assertRaises(EmptyPoolError):
			FiducialOracleSample(data, 0, 1.0, RngStream(6))


class Oracles(TestCase):
	def test_ScaledChiSquare(self) -> None:
		self.assertAlmostEqual(1.197, ScaledChiSquareQuantile(0.95, 150), delta=0.001)
		self.assertAlmostEqual(0.818, ScaledChiSquareQuantile(0.05, 150), delta=0.001)

	def test_FType(self) -> None:
		# a very large denominator degree of freedom turns the F-type into the chi-square quantile
		self.assertAlmostEqual(ChiSquareQuantile(0.9, 4), FTypeQuantile(0.9, 4, 10 ** 7), places=2)
		self.assertGreater(FTypeQuantile(0.9, 4, 10), ChiSquareQuantile(0.9, 4))

	def test_Normal(self) -> None:
		self.assertAlmostEqual(1.959964, HalfNormalQuantile(0.95), places=5)
		self.assertAlmostEqual(2.0 * 1.959964, HalfNormalQuantile(0.95, 2.0), places=5)
		self.assertAlmostEqual(1.0, NormalOracleQuantile(0.5, 1.0, 3.0))


class Reports(TestCase):
	def test_Report(self) -> None:
		report = InferenceReport("cb", "refined-sample", metadata={"m_alpha": 12})
		report.AddThreshold(0.05, 1.2)
		report.AddThreshold(0.5, 0.9)
		report.AddInterval("beta1", 0.05, (0.7, 1.3))

		self.assertTrue(report.IsNested)
		self.assertListEqual([0.05, 0.5], report.AlphaGrid)

		document = report.ToDict()
		self.assertEqual("refined-sample", document["path"])
		self.assertEqual([{"alpha": 0.05, "q": 1.2}, {"alpha": 0.5, "q": 0.9}], document["thresholds"])
		self.assertEqual(0.7, document["intervals"]["beta1"][0]["lower"])

		print()
		print(report.ToTree().Render())

	def test_NotNested(self) -> None:
		report = InferenceReport("standard_bootstrap", "baseline")
		report.AddThreshold(0.05, 0.9)
		report.AddThreshold(0.5, 1.2)

		self.assertFalse(report.IsNested)

	def test_IntervalOrder(self) -> None:
		with self.assertRaises(ValueError):
			InferenceReport("cb", "baseline").AddInterval("beta1", 0.1, (2.0, 1.0))
