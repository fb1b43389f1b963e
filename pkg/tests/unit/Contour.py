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
"""Testcases for association functions and contour values."""
from math     import exp
from unittest import TestCase

from numpy         import array, allclose, argsort, ndarray
from numpy.random  import default_rng

from pyCalibratedBootstrap.MathKit import DomainError, RngStream, DesignMatrix
from pyCalibratedBootstrap.Models  import UnsupportedProfileError, Dataset, GaussianMeanModel, LinearRegressionModel
from pyCalibratedBootstrap.Contour import ContourValue, TStat, TStatProfile, FullAssociation, ProfileAssociation, AsAssociation
from pyCalibratedBootstrap.Contour import ContourMC, ContourExactMean, ContourExactLinRegKnownSigma


if __name__ == "__main__": # pragma: no cover
	print("ERROR: you called a testcase declaration file as an executable module.")
	print("Use: 'python -m unitest <testcase module>'")
	exit(1)


class Values(TestCase):
	def test_Create(self) -> None:
		value = ContourValue(array([1.0]), -0.5, 0.25, 100)

		self.assertEqual(-0.5, value.TValue)
		self.assertEqual(0.25, value.UValue)
		self.assertEqual(100, value.NMC)

	def test_Invalid(self) -> None:
		with self.assertRaises(ValueError):
			ContourValue(array([1.0]), 0.5, 0.25, 100)
		with self.assertRaises(ValueError):
			ContourValue(array([1.0]), -0.5, 1.5, 100)


class Associations(TestCase):
	def test_TStat(self) -> None:
		model = GaussianMeanModel()
		data = Dataset([0.0, 1.0, 2.0])

		self.assertEqual(0.0, TStat(model, data, array([1.0])))
		self.assertAlmostEqual(-1.5, TStat(model, data, array([2.0])))

	def test_TStatProfileUnsupported(self) -> None:
		with self.assertRaises(UnsupportedProfileError):
			TStatProfile(GaussianMeanModel(), Dataset([0.0, 1.0]), 0, 0.0)
		with self.assertRaises(UnsupportedProfileError):
			ProfileAssociation(GaussianMeanModel(), 0)

	def test_ProfileNotAboveFull(self) -> None:
		rng = default_rng(3)
		x = DesignMatrix(rng.standard_normal((30, 3)))
		data = Dataset(x.Entries @ array([1.0, 0.5, -1.0]) + rng.standard_normal(30), x)
		model = LinearRegressionModel(sigma=1.0)
		theta = array([0.7, 0.0, 0.0])

		full = FullAssociation(model).Statistic(data, theta)
		profile = ProfileAssociation(model, 0).Statistic(data, theta)

		self.assertLessEqual(full, profile)
		self.assertLessEqual(profile, 0.0)
		self.assertTrue(allclose([0.7], ProfileAssociation(model, 0).Target(theta)))

	def test_AsAssociation(self) -> None:
		model = GaussianMeanModel()
		association = AsAssociation(model)

		self.assertIsInstance(association, FullAssociation)
		self.assertIs(association, AsAssociation(association))
		self.assertEqual("full(gaussian-mean)", association.Description())


class Exact(TestCase):
	def test_Mean(self) -> None:
		self.assertAlmostEqual(1.0, ContourExactMean(0.0))
		self.assertAlmostEqual(0.15730, ContourExactMean(-1.0), places=5)

		with self.assertRaises(DomainError):
			ContourExactMean(0.1)

	def test_LinearRegression(self) -> None:
		# survival of chi2 with 2 degrees of freedom at 2
		self.assertAlmostEqual(exp(-1.0), ContourExactLinRegKnownSigma(-1.0, 2, 1.0))
		self.assertAlmostEqual(exp(-0.5), ContourExactLinRegKnownSigma(-1.0, 2, 2.0))

		with self.assertRaises(DomainError):
			ContourExactLinRegKnownSigma(-1.0, 2, 0.0)


class MonteCarlo(TestCase):
	def test_MatchesExactMean(self) -> None:
		model = GaussianMeanModel()
		data = Dataset(default_rng(7).standard_normal(20) + 1.0)
		theta = array([1.3])

		value = ContourMC(model, data, theta, 4000, RngStream(9))
		exact = ContourExactMean(value.TValue)

		print()
		print(f"Statistics:")
		print(f"  T: {value.TValue:.4f}   MC: {value.UValue:.4f}   exact: {exact:.4f}")

		self.assertEqual(4000, value.NMC)
		self.assertAlmostEqual(exact, value.UValue, delta=0.03)

	def test_IndependentOfWorkers(self) -> None:
		model = GaussianMeanModel()
		data = Dataset(default_rng(8).standard_normal(15))
		theta = array([0.2])

		sequential = ContourMC(model, data, theta, 200, RngStream(10), workers=1)
		threaded = ContourMC(model, data, theta, 200, RngStream(10), workers=4)

		self.assertEqual(sequential.UValue, threaded.UValue)

	def test_InvalidCount(self) -> None:
		with self.assertRaises(ValueError):
			ContourMC(GaussianMeanModel(), Dataset([0.0, 1.0]), array([0.0]), 0, RngStream(1))


class ShiftedGaussianMeanModel(GaussianMeanModel):
	def Loss(self, data: Dataset, theta: ndarray) -> float:
		return super().Loss(data, theta) + 123.0


class Agreement(TestCase):
	_count = 4000
	_thetas = 50
	_seeds = 5

	def _LargestDeviation(self, model, data, exact, seed: int) -> float:
		rng = default_rng(seed)
		thetaHat = model.CachedFit(data)
		worst = 0.0
		for k in range(self._thetas):
			theta = thetaHat + rng.uniform(0.0, 0.6) * rng.standard_normal(thetaHat.size)
			value = ContourMC(model, data, theta, self._count, RngStream(seed).Child(k))
			worst = max(worst, abs(value.UValue - exact(value.TValue)))

		return worst

	def test_GaussianMean(self) -> None:
		model = GaussianMeanModel()
		deviations = []
		for seed in range(self._seeds):
			data = Dataset(default_rng(100 + seed).standard_normal(20) + 1.0)
			deviations.append(self._LargestDeviation(model, data, ContourExactMean, 200 + seed))

		print()
		print(f"Statistics:")
		print(f"  largest deviation per seed: {', '.join(f'{d:.4f}' for d in deviations)}")

		self.assertLessEqual(max(deviations), 0.06)

	def test_LinearRegressionKnownSigma(self) -> None:
		model = LinearRegressionModel(sigma=1.0)
		deviations = []
		for seed in range(self._seeds):
			rng = default_rng(300 + seed)
			x = DesignMatrix(rng.standard_normal((20, 3)))
			data = Dataset(x.Entries @ array([1.0, -0.5, 0.25]) + rng.standard_normal(20), x)
			deviations.append(self._LargestDeviation(model, data, lambda t: ContourExactLinRegKnownSigma(t, 3, 1.0), 400 + seed))

		print()
		print(f"Statistics:")
		print(f"  largest deviation per seed: {', '.join(f'{d:.4f}' for d in deviations)}")

		self.assertLessEqual(max(deviations), 0.06)


class Invariances(TestCase):
	def test_ExactMonotoneInLoss(self) -> None:
		rng = default_rng(21)
		x = DesignMatrix(rng.standard_normal((25, 3)))
		data = Dataset(x.Entries @ array([0.5, 0.5, -1.0]) + rng.standard_normal(25), x)
		model = LinearRegressionModel(sigma=1.0)
		thetaHat = model.CachedFit(data)

		thetas = [thetaHat + 0.4 * rng.standard_normal(3) for _ in range(200)]
		losses = array([model.Loss(data, theta) for theta in thetas])
		contours = [ContourExactLinRegKnownSigma(TStat(model, data, thetas[i]), 3, 1.0) for i in argsort(losses)]

		for lower, higher in zip(contours[1:], contours[:-1]):
			self.assertLessEqual(lower, higher)

	def test_ReplicateOrder(self) -> None:
		model = GaussianMeanModel()
		data = Dataset(default_rng(22).standard_normal(12))
		theta = array([0.4])
		rng = RngStream(23)
		count = 300

		observed = TStat(model, data, theta)
		permutation = default_rng(24).permutation(count)
		hits = sum(TStat(model, model.Simulate(theta, data, rng.Child(int(i))), theta) <= observed for i in permutation)

		self.assertEqual(hits / count, ContourMC(model, data, theta, count, rng).UValue)

	def test_TStatLossShift(self) -> None:
		y = default_rng(25).standard_normal(30)
		theta = array([0.35])

		plain = TStat(GaussianMeanModel(), Dataset(y), theta)
		shifted = TStat(ShiftedGaussianMeanModel(), Dataset(y), theta)

		self.assertLess(plain, 0.0)
		self.assertAlmostEqual(plain, shifted, places=9)
