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
Distributional resampling and the combined calibration pipeline.

Candidates collected by the resampling approximation carry contour values that are not uniform. :func:`DRSelect`
flattens them: for fresh uniform draws ``u`` it selects, with replacement, the pool candidate whose contour value is
nearest to ``u``. :func:`RADRPipeline` runs the resampling approximation for a set of levels, pools every candidate and
refines the pool.
"""
from sys                             import version_info
from typing                          import Dict, Iterable, Iterator, List, Optional as Nullable, Sequence, Tuple, Union

from numpy                           import ndarray, array, asarray, argsort, float64, histogram, int64, linspace, minimum, searchsorted, vstack, where
from scipy.stats                     import kstest

from pyTooling.Decorators            import export, readonly
from pyTooling.MetaClasses           import ExtendedType

from pyCalibratedBootstrap           import CalibratedBootstrapException
from pyCalibratedBootstrap.MathKit   import RngStream, ParallelMap
from pyCalibratedBootstrap.Models    import Dataset, ModelSpec
from pyCalibratedBootstrap.Contour   import Association, AsAssociation
from pyCalibratedBootstrap.Calibrate import RaConfig, CandidateDraw, CalibrationTrace, RARun


@export
class EmptyPoolError(CalibratedBootstrapException):
	"""Raised when a selection or a quantile is requested from an empty pool."""


@export
def KSUniform(uValues: Iterable[float]) -> float:
	"""Two-sided Kolmogorov-Smirnov statistic ``sup|F̂(u) − u|`` against ``Uniform(0, 1)``."""
	values = asarray(list(uValues), dtype=float64)
	if values.size == 0:
		raise EmptyPoolError(f"Kolmogorov-Smirnov statistic of an empty sample.")

	return float(kstest(values, "uniform").statistic)


def _ContourValues(pool: Sequence[CandidateDraw]) -> ndarray:
	values = []
	for index, draw in enumerate(pool):
		if draw.UValue is None:
			ex = ValueError(f"Pool entry {index} has no contour value.")
			if version_info >= (3, 11):  # pragma: no cover
				ex.add_note(f"Pools for distributional resampling need inner simulations (B >= 1).")
			raise ex
		values.append(draw.UValue)

	return asarray(values, dtype=float64)


def _NearestIndices(uValues: ndarray, targets: ndarray) -> ndarray:
	order = argsort(uValues, kind="stable")
	ordered = uValues[order]
	last = ordered.size - 1

	right = minimum(searchsorted(ordered, targets, side="left"), last)
	left = where(right > 0, right - 1, 0)
	# first entry of the left neighbour's group of equal values
	left = searchsorted(ordered, ordered[left], side="left")

	leftDistance = abs(targets - ordered[left])
	rightDistance = abs(ordered[right] - targets)
	leftIndex = order[left]
	rightIndex = order[right]

	return where(
		leftDistance < rightDistance,
		leftIndex,
		where(rightDistance < leftDistance, rightIndex, minimum(leftIndex, rightIndex))
	).astype(int64)


@export
class RefinedSample(metaclass=ExtendedType, slots=True):
	"""
	Multiset of pool candidates whose contour values approximate ``Uniform(0, 1)``.

	The sample keeps its source pool, the per-level calibration traces and the estimate on the observed data (the center
	for regions and intervals). It is immutable.
	"""

	_pool:         Tuple[CandidateDraw, ...]
	_indices:      ndarray
	_sourceAlphas: Tuple[float, ...]
	_ksStatistic:  float
	_traces:       Tuple[CalibrationTrace, ...]
	_center:       Nullable[ndarray]

	def __init__(
		self,
		pool: Sequence[CandidateDraw],
		indices: ndarray,
		sourceAlphas: Iterable[float] = (),
		traces: Iterable[CalibrationTrace] = (),
		center: Nullable[ndarray] = None
	) -> None:
		self._pool = tuple(pool)
		self._indices = asarray(indices, dtype=int64)
		self._indices.setflags(write=False)
		self._sourceAlphas = tuple(sourceAlphas)
		self._traces = tuple(traces)
		self._center = center
		self._ksStatistic = KSUniform(self.UValues)

	@readonly
	def Pool(self) -> Tuple[CandidateDraw, ...]:
		return self._pool

	@readonly
	def Indices(self) -> ndarray:
		"""Pool indices of the selected candidates, in selection order."""
		return self._indices

	@readonly
	def Draws(self) -> Tuple[CandidateDraw, ...]:
		return tuple(self._pool[i] for i in self._indices)

	@readonly
	def SourceAlphas(self) -> Tuple[float, ...]:
		return self._sourceAlphas

	@readonly
	def BOut(self) -> int:
		return self._indices.size

	@readonly
	def KSStatistic(self) -> float:
		return self._ksStatistic

	@readonly
	def UValues(self) -> ndarray:
		return asarray([self._pool[i].UValue for i in self._indices], dtype=float64)

	@readonly
	def Thetas(self) -> ndarray:
		"""Selected estimates as a ``B_out × p`` matrix."""
		return vstack([self._pool[i].ThetaStar for i in self._indices])

	@readonly
	def Traces(self) -> Tuple[CalibrationTrace, ...]:
		return self._traces

	@readonly
	def MAlphas(self) -> Dict[float, int]:
		return {trace.Alpha: trace.MAlpha for trace in self._traces}

	@readonly
	def Center(self) -> Nullable[ndarray]:
		return self._center

	def __len__(self) -> int:
		return self._indices.size

	def __repr__(self) -> str:
		return f"RefinedSample(B_out={self._indices.size}, pool={len(self._pool)}, KS={self._ksStatistic:.4f})"


@export
def DRSelect(
	pool: Sequence[CandidateDraw],
	bOut: int,
	rng: RngStream,
	sourceAlphas: Iterable[float] = (),
	traces: Iterable[CalibrationTrace] = (),
	center: Nullable[ndarray] = None
) -> RefinedSample:
	"""
	Select ``bOut`` candidates with replacement: for ``u ~ Uniform(0, 1)`` the candidate with the nearest contour value
	is taken, ties going to the lowest pool index.

	:raises EmptyPoolError: If the pool is empty.
	"""
	if len(pool) == 0:
		raise EmptyPoolError(f"Distributional resampling from an empty pool.")
	elif bOut < 1:
		raise ValueError(f"Number of selections must be at least 1, got {bOut}.")

	uValues = _ContourValues(pool)
	targets = rng.Generator().random(bOut)
	return RefinedSample(pool, _NearestIndices(uValues, targets), sourceAlphas, traces, center)


@export
def RADRPipeline(
	subject: Union[ModelSpec, Association],
	data: Dataset,
	alphaSet: Iterable[float],
	config: RaConfig,
	rng: RngStream,
	bOut: Nullable[int] = None,
	workers: int = 1
) -> RefinedSample:
	"""
	Resampling approximation for every level in ``alphaSet`` followed by distributional resampling of the pooled
	candidates.

	Level ``k`` calibrates with ``rng.Child(k)``; the selection uses ``rng.Child(len(alphaSet))``. ``bOut`` defaults to the
	pool size. Levels are calibrated concurrently when ``workers > 1``; the result does not depend on it.
	"""
	alphas = list(alphaSet)
	if len(alphas) == 0:
		raise ValueError(f"Set of significance levels must not be empty.")

	association = AsAssociation(subject)
	center = association.Model.CachedFit(data)

	runs = ParallelMap(
		lambda k: RARun(association, data, config.WithAlpha(alphas[k]), rng.Child(k)),
		range(len(alphas)),
		workers
	)

	pool: List[CandidateDraw] = []
	traces: List[CalibrationTrace] = []
	for _, trace, draws in runs:
		traces.append(trace)
		pool.extend(draws)

	return DRSelect(pool, len(pool) if bOut is None else bOut, rng.Child(len(alphas)), alphas, traces, center)


@export
class ContourHistogram(metaclass=ExtendedType, slots=True):
	"""Histogram of contour values per (level, resample size) group of a pool."""

	_edges:  ndarray
	_counts: Dict[Tuple[Nullable[float], int], ndarray]

	def __init__(self, pool: Sequence[CandidateDraw], bins: int = 10) -> None:
		if len(pool) == 0:
			raise EmptyPoolError(f"Histogram of an empty pool.")
		elif bins < 1:
			raise ValueError(f"Number of bins must be at least 1, got {bins}.")

		uValues = _ContourValues(pool)
		self._edges = linspace(0.0, 1.0, bins + 1)

		groups: Dict[Tuple[Nullable[float], int], List[float]] = {}
		for draw, u in zip(pool, uValues):
			groups.setdefault((draw.Alpha, draw.MUsed), []).append(u)

		self._counts = {key: histogram(array(values), bins=self._edges)[0] for key, values in sorted(groups.items(), key=lambda item: (item[0][0] or 0.0, item[0][1]))}

	@readonly
	def Edges(self) -> ndarray:
		return self._edges

	@readonly
	def Counts(self) -> Dict[Tuple[Nullable[float], int], ndarray]:
		return self._counts

	def Rows(self) -> Iterator[Tuple[Nullable[float], int, float, float, int]]:
		"""Rows ``(alpha, m, bin_lower, bin_upper, count)``."""
		for (alpha, m), counts in self._counts.items():
			for lower, upper, count in zip(self._edges[:-1], self._edges[1:], counts):
				yield alpha, m, float(lower), float(upper), int(count)
