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
"""
Grid based distributional resampling for the von Mises location and its exact fiducial reference.

The candidate pool is a uniform grid of locations on ``[0, 2π)``; every grid point gets a Monte-Carlo contour value and
the pool is refined by :func:`~pyCalibratedBootstrap.Refine.DRSelect`.
"""
from math                            import atan2, hypot, pi
from typing                          import Iterable, List, Optional as Nullable, Tuple

from numpy                           import ndarray, asarray, cos, exp, float64, interp, linspace, searchsorted, sin, sort
from scipy.integrate                 import cumulative_trapezoid

from pyTooling.Decorators            import export, readonly
from pyTooling.MetaClasses           import ExtendedType

from pyCalibratedBootstrap.MathKit   import RngStream, DegenerateError, ParallelMap
from pyCalibratedBootstrap.Models    import Dataset, VonMisesModel
from pyCalibratedBootstrap.Contour   import ContourMC
from pyCalibratedBootstrap.Calibrate import CandidateDraw
from pyCalibratedBootstrap.Refine    import RefinedSample, DRSelect


__all__ = ["EVALUATION_POINTS"]

EVALUATION_POINTS = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)   #: Angles at which the distribution functions are tabulated.


@export
def LocationGrid(size: int) -> ndarray:
	"""``size`` equally spaced locations ``2πk/size`` on ``[0, 2π)``."""
	if size < 1:
		raise ValueError(f"Grid needs at least one point, got {size}.")
	return linspace(0.0, 2.0 * pi, size, endpoint=False)


@export
class VonMisesDRResult(metaclass=ExtendedType, slots=True):
	"""Refined location sample with its empirical distribution function."""

	_sample:  RefinedSample
	_sorted:  ndarray

	def __init__(self, sample: RefinedSample) -> None:
		self._sample = sample
		self._sorted = sort(sample.Thetas[:, 0])

	@readonly
	def Sample(self) -> RefinedSample:
		return self._sample

	def CDF(self, points: Iterable[float] = EVALUATION_POINTS) -> List[Tuple[float, float]]:
		"""Pairs ``(θ, F̂(θ))`` of the empirical distribution function of the refined locations."""
		count = self._sorted.size
		return [(float(point), float(searchsorted(self._sorted, point, side="right")) / count) for point in points]


@export
def VonMisesGridDR(
	data: Dataset,
	kappa: float,
	grid: Iterable[float],
	nMC: int,
	rng: RngStream,
	bOut: Nullable[int] = None,
	workers: int = 1
) -> VonMisesDRResult:
	"""
	Contour values on a location grid followed by distributional resampling.

	Grid point ``i`` uses ``rng.Child(i)`` for its ``nMC`` replicates, the selection ``rng.Child(len(grid))``. ``bOut``
	defaults to the grid size.
	"""
	locations = asarray(list(grid), dtype=float64)
	if locations.size == 0:
		raise ValueError(f"Location grid must not be empty.")

	model = VonMisesModel(kappa)
	model.CachedFit(data)

	def contour(index: int) -> CandidateDraw:
		theta = locations[[index]]
		value = ContourMC(model, data, theta, nMC, rng.Child(index))
		return CandidateDraw(theta, data.Size, value.TValue, value.UValue, model.Loss(data, theta))

	pool = ParallelMap(contour, range(locations.size), workers)
	sample = DRSelect(pool, locations.size if bOut is None else bOut, rng.Child(locations.size), center=model.CachedFit(data))
	return VonMisesDRResult(sample)


@export
def VonMisesFiducialCDF(
	angles: ndarray,
	kappa: float,
	points: Iterable[float] = EVALUATION_POINTS,
	concentration: str = "resultant",
	resolution: int = 20001
) -> List[Tuple[float, float]]:
	"""
	Distribution function on ``[0, 2π)`` of the fiducial density ``∝ exp{c·cos(θ − g)}``, ``g`` being the circular mean
	direction of ``angles``.

	``concentration`` selects ``c = κR`` (``resultant``, the exact fiducial distribution with resultant length ``R``) or
	``c = κR/n`` (``mean-resultant``).
	"""
	values = asarray(angles, dtype=float64)
	sines, cosines = float(sin(values).sum()), float(cos(values).sum())
	resultant = hypot(sines, cosines)
	if resultant <= 1e-12 * values.size:
		raise DegenerateError(f"Circular mean undefined for angles with zero resultant length.")

	if concentration == "resultant":
		c = kappa * resultant
	elif concentration == "mean-resultant":
		c = kappa * resultant / values.size
	else:
		raise ValueError(f"Unknown concentration '{concentration}', expected 'resultant' or 'mean-resultant'.")

	direction = atan2(sines, cosines)
	theta = linspace(0.0, 2.0 * pi, resolution)
	# shift by the maximum exponent for numerical range
	density = exp(c * (cos(theta - direction) - 1.0))
	cumulative = cumulative_trapezoid(density, theta, initial=0.0)
	cumulative /= cumulative[-1]

	return [(float(point), float(interp(point, theta, cumulative))) for point in points]
