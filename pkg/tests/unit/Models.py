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
"""Testcases for datasets and model families."""
from math     import log, pi
from unittest import TestCase

from numpy         import array, allclose, arange, ones
from numpy.random  import default_rng

from pyCalibratedBootstrap.MathKit import RngStream, DegenerateError, DesignMatrix, LeastSquares
from pyCalibratedBootstrap.Models  import ModelException, UnsupportedProfileError, Dataset, RequireDesign
from pyCalibratedBootstrap.Models  import GaussianMeanModel, LinearRegressionModel, LassoModel, SoftThresholdMeanModel, VonMisesModel


if __name__ == "__main__": # pragma: no cover
	print("ERROR: you called a testcase declaration file as an executable module.")
	print("Use: 'python -m unitest <testcase module>'")
	exit(1)


def _RegressionData(n: int = 40, p: int = 3, seed: int = 1) -> Dataset:
	rng = default_rng(seed)
	x = DesignMatrix(rng.standard_normal((n, p)))
	return Dataset(x.Entries @ arange(1.0, p + 1.0) + rng.standard_normal(n), x)


class Datasets(TestCase):
	def test_Create(self) -> None:
		data = Dataset([1.0, 2.0, 3.0], meta="observed")

		self.assertEqual(3, data.Size)
		self.assertEqual(3, len(data))
		self.assertEqual("observed", data.Meta)
		self.assertIsNone(data.X)
		self.assertFalse(data.Y.flags.writeable)

	def test_Empty(self) -> None:
		with self.assertRaises(ValueError):
			Dataset([])

	def test_ShapeMismatch(self) -> None:
		with self.assertRaises(ValueError):
			Dataset([1.0, 2.0], DesignMatrix(ones((3, 1))))

	def test_WrongDesignType(self) -> None:
		with self.assertRaises(TypeError):
			Dataset([1.0, 2.0], [[1.0], [2.0]])

	def test_RequireDesign(self) -> None:
		with self.assertRaises(ModelException):
			RequireDesign(Dataset([1.0, 2.0]))

	def test_FitIsCached(self) -> None:
		calls = []
		data = Dataset([1.0, 2.0])

		def fit():
			calls.append(1)
			return array([1.5])

		data.CachedFit("key", fit)
		data.CachedFit("key", fit)

		self.assertEqual(1, len(calls))

	def test_Take(self) -> None:
		data = _RegressionData(n=10)
		subset = data.Take(array([0, 0, 9]))

		self.assertEqual(3, subset.Size)
		self.assertTrue(allclose(data.X.Entries[0], subset.X.Entries[1]))
		self.assertEqual(data.Y[9], subset.Y[2])


class GaussianMean(TestCase):
	def test_FitAndLoss(self) -> None:
		model = GaussianMeanModel()
		data = Dataset([0.0, 1.0, 2.0, 5.0])

		self.assertTrue(allclose([2.0], model.Fit(data)))
		self.assertAlmostEqual(0.5 * (4.0 + 1.0 + 0.0 + 9.0), model.Loss(data, array([2.0])))
		self.assertEqual(1, model.ParameterDimension(data))
		self.assertFalse(model.SupportsProfile)

	def test_ProfileUnsupported(self) -> None:
		with self.assertRaises(UnsupportedProfileError):
			GaussianMeanModel().ProfileFit(Dataset([1.0]), 0, 0.0)

	def test_Simulate(self) -> None:
		model = GaussianMeanModel(4.0)
		replicate = model.Simulate(array([3.0]), Dataset(ones(5000)), RngStream(2))

		self.assertEqual(5000, replicate.Size)
		self.assertAlmostEqual(3.0, float(replicate.Y.mean()), delta=0.1)
		self.assertAlmostEqual(4.0, float(replicate.Y.var()), delta=0.3)
		self.assertTrue(allclose([3.0], replicate.Origin))

	def test_InvalidVariance(self) -> None:
		with self.assertRaises(ValueError):
			GaussianMeanModel(0.0)


class LinearRegression(TestCase):
	def test_KnownSigma(self) -> None:
		data = _RegressionData()
		model = LinearRegressionModel(sigma=2.0)
		beta = model.Fit(data)

		self.assertEqual(3, model.ParameterDimension(data))
		self.assertTrue(allclose(LeastSquares(data.X, data.Y), beta))

		residual = data.Y - data.X.Entries @ beta
		self.assertAlmostEqual(0.5 * float(residual @ residual) / 4.0, model.Loss(data, beta))

	def test_UnknownSigma(self) -> None:
		data = _RegressionData()
		model = LinearRegressionModel()
		theta = model.Fit(data)

		self.assertEqual(4, theta.size)
		self.assertEqual(4, model.ParameterDimension(data))

		residual = data.Y - data.X.Entries @ theta[:3]
		rss = float(residual @ residual)
		n = data.Size
		self.assertAlmostEqual((rss / n) ** 0.5, model.NoiseLevel(theta))
		self.assertAlmostEqual(0.5 * n * log(2.0 * pi * rss / n) + 0.5 * n, model.Loss(data, theta), places=8)
		self.assertEqual(float("inf"), model.Loss(data, array([1.0, 2.0, 3.0, 0.0])))

	def test_ProfileFit(self) -> None:
		data = _RegressionData()
		model = LinearRegressionModel(sigma=1.0)
		theta = model.ProfileFit(data, 0, 0.25)

		self.assertEqual(0.25, theta[0])
		self.assertLessEqual(model.Loss(data, model.Fit(data)), model.Loss(data, theta))

		with self.assertRaises(IndexError):
			model.ProfileFit(data, 3, 0.0)


class Lasso(TestCase):
	def test_LossIsPenalized(self) -> None:
		data = _RegressionData()
		model = LassoModel(penalty=5.0, variance=1.0)
		beta = array([1.0, -2.0, 0.0])

		residual = data.Y - data.X.Entries @ beta
		self.assertAlmostEqual(0.5 * float(residual @ residual) + 5.0 * 3.0, model.Loss(data, beta))

	def test_ProfileFitPinsCoordinate(self) -> None:
		data = _RegressionData()
		model = LassoModel(penalty=5.0, variance=1.0)
		theta = model.ProfileFit(data, 1, 0.0)

		self.assertEqual(0.0, theta[1])
		self.assertLessEqual(model.Loss(data, model.Fit(data)), model.Loss(data, theta) + 1e-6)

	def test_InvalidSettings(self) -> None:
		with self.assertRaises(ValueError):
			LassoModel(-1.0, 1.0)
		with self.assertRaises(ValueError):
			LassoModel(1.0, 0.0)


class SoftThresholdMean(TestCase):
	def test_LossConvention(self) -> None:
		model = SoftThresholdMeanModel(10.0)
		data = Dataset([1.0] * 20)

		# threshold lambda/n = 0.5
		self.assertTrue(allclose([0.5], model.Fit(data)))
		self.assertEqual(1, len(model.Notes))

	def test_VerbatimConvention(self) -> None:
		model = SoftThresholdMeanModel(0.25, convention="verbatim")

		self.assertTrue(allclose([0.75], model.Fit(Dataset([1.0] * 20))))
		self.assertTrue(allclose([0.0], model.Fit(Dataset([0.2] * 20))))
		self.assertTrue(allclose([-0.75], model.Fit(Dataset([-1.0] * 20))))

	def test_FitMinimizesLoss(self) -> None:
		model = SoftThresholdMeanModel(0.3, convention="verbatim")
		data = Dataset(default_rng(4).standard_normal(30) + 1.0)
		best = model.Loss(data, model.Fit(data))

		for shift in (-0.01, 0.01):
			with self.subTest(shift=shift):
				self.assertLessEqual(best, model.Loss(data, model.Fit(data) + shift))

	def test_UnknownConvention(self) -> None:
		with self.assertRaises(ValueError):
			SoftThresholdMeanModel(1.0, convention="other")


class VonMises(TestCase):
	def test_CircularMean(self) -> None:
		model = VonMisesModel(2.0)
		self.assertAlmostEqual(1.2, float(model.Fit(Dataset([1.0, 1.2, 1.4]))[0]), places=9)

		# the pair straddles 0, its mean lies just above 0
		theta = model.Fit(Dataset([0.1, 2.0 * pi - 0.08]))
		self.assertAlmostEqual(0.01, float(theta[0]), places=6)

	def test_Loss(self) -> None:
		model = VonMisesModel(2.0)

		self.assertAlmostEqual(-4.0, model.Loss(Dataset([0.0, 0.0]), array([0.0])))

	def test_AntipodalPair(self) -> None:
		with self.assertRaises(DegenerateError):
			VonMisesModel(2.0).Fit(Dataset([0.0, pi]))
