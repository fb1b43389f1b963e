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
Confidence regions and intervals from refined samples or raw pools, baseline bootstraps and exact fiducial oracles.

All constructions share the same statistics (:class:`QuadraticFormStatistic`, :class:`AbsoluteDeviationStatistic`) and
the same fit code paths, so comparisons between methods only differ in how candidates were generated. Empirical
quantiles follow the inverted-ECDF convention (:func:`EmpiricalQuantile`).
"""
from enum                            import Enum
from math                            import ceil
from typing                          import Callable, Dict, Iterable, List, Optional as Nullable, Sequence, Tuple, Union

from numpy                           import ndarray, asarray, abs as np_abs, atleast_2d, float64, sort, vstack
from scipy.linalg                    import solve_triangular
from scipy.special                   import fdtri

from pyTooling.Decorators            import export, readonly
from pyTooling.MetaClasses           import ExtendedType
from pyTooling.Tree                  import Node

from pyCalibratedBootstrap.MathKit   import RngStream, DegenerateError, ParallelMap, LeastSquares, StudentTVectorSample
from pyCalibratedBootstrap.MathKit   import ChiSquareQuantile, NormalQuantile, CheckDegreesOfFreedom, CheckProbability
from pyCalibratedBootstrap.Models    import Dataset, ModelSpec, LassoModel, LinearRegressionModel, RequireDesign
from pyCalibratedBootstrap.Contour   import Association, AsAssociation
from pyCalibratedBootstrap.Calibrate import CandidateDraw, MOutOfNPool
from pyCalibratedBootstrap.Refine    import EmptyPoolError, RefinedSample


@export
class SampleMethod(Enum):
	"""Origin of a candidate sample."""
	CalibratedBootstrap = "cb"
	StandardBootstrap =   "standard_bootstrap"
	ResidualBootstrap =   "residual_bootstrap"
	ParametricGaussian =  "parametric_gaussian"
	ParametricT =         "parametric_t"
	Oracle =              "oracle"

	def __str__(self) -> str:
		return self.value


@export
class CandidatePool(metaclass=ExtendedType, slots=True):
	"""
	Raw candidate estimates of one method, centered at the estimate on the observed data.

	Baseline bootstraps and oracles return this type; per-level calibration pools are plain lists of
	:class:`~pyCalibratedBootstrap.Calibrate.CandidateDraw`.
	"""

	_thetas: ndarray
	_center: ndarray
	_method: SampleMethod
	_label:  str
	_draws:  Tuple[CandidateDraw, ...]

	def __init__(self, thetas: ndarray, center: ndarray, method: SampleMethod, label: Nullable[str] = None, draws: Iterable[CandidateDraw] = ()) -> None:
		self._thetas = atleast_2d(asarray(thetas, dtype=float64))
		self._thetas.setflags(write=False)
		self._center = asarray(center, dtype=float64).reshape(-1)
		self._method = method
		self._label = str(method) if label is None else label
		self._draws = tuple(draws)

	@readonly
	def Thetas(self) -> ndarray:
		return self._thetas

	@readonly
	def Center(self) -> ndarray:
		return self._center

	@readonly
	def Method(self) -> SampleMethod:
		return self._method

	@readonly
	def Label(self) -> str:
		"""Method label written to reports, e.g. ``residual (non-debiased)``."""
		return self._label

	@readonly
	def Draws(self) -> Tuple[CandidateDraw, ...]:
		return self._draws

	def __len__(self) -> int:
		return self._thetas.shape[0]

	def __repr__(self) -> str:
		return f"CandidatePool({self._label}, B={self._thetas.shape[0]})"


Sample = Union[RefinedSample, CandidatePool, Sequence[CandidateDraw]]


def _Thetas(sample: Sample) -> ndarray:
	if isinstance(sample, (RefinedSample, CandidatePool)):
		if len(sample) == 0:
			raise EmptyPoolError(f"Sample is empty.")
		return sample.Thetas
	elif len(sample) == 0:
		raise EmptyPoolError(f"Sample is empty.")

	return vstack([draw.ThetaStar for draw in sample])


def _Center(sample: Sample, center: Nullable[ndarray]) -> ndarray:
	if center is not None:
		return asarray(center, dtype=float64).reshape(-1)
	elif isinstance(sample, (RefinedSample, CandidatePool)) and sample.Center is not None:
		return sample.Center

	raise ValueError(f"Sample carries no center estimate; pass 'center' explicitly.")


@export
def EmpiricalQuantile(values: Iterable[float], level: float) -> float:
	"""
	Inverted-ECDF (type-1) quantile: the ``k``-th order statistic with ``k = ⌈level·B⌉``, clamped to ``[1, B]``.

	:raises EmptyPoolError: If ``values`` is empty.
	"""
	ordered = sort(asarray(list(values), dtype=float64))
	count = ordered.size
	if count == 0:
		raise EmptyPoolError(f"Quantile of an empty sample.")
	elif not (0.0 <= level <= 1.0):
		raise ValueError(f"Quantile level must be in [0, 1], got {level}.")

	# guard the ceiling against representation error of level·B
	k = min(max(ceil(level * count - 1e-9), 1), count)
	return float(ordered[k - 1])


@export
class QuadraticFormStatistic(metaclass=ExtendedType, slots=True):
	"""``(θ − θ̂)'G(θ − θ̂)/scale`` for a Gram matrix ``G``."""

	_center: ndarray
	_gram:   ndarray
	_scale:  float

	def __init__(self, center: ndarray, gram: ndarray, scale: float = 1.0) -> None:
		if scale <= 0.0:
			raise ValueError(f"Scale must be positive, got {scale}.")

		self._center = asarray(center, dtype=float64).reshape(-1)
		self._gram = asarray(gram, dtype=float64)
		self._scale = scale

	@readonly
	def Center(self) -> ndarray:
		return self._center

	@readonly
	def Scale(self) -> float:
		return self._scale

	def __call__(self, theta: ndarray) -> float:
		delta = asarray(theta, dtype=float64).reshape(-1)[:self._center.size] - self._center
		return float(delta @ self._gram @ delta) / self._scale

	def Values(self, thetas: ndarray) -> ndarray:
		delta = atleast_2d(thetas)[:, :self._center.size] - self._center
		return ((delta @ self._gram) * delta).sum(axis=1) / self._scale


@export
class AbsoluteDeviationStatistic(metaclass=ExtendedType, slots=True):
	"""``|θⱼ − θ̂ⱼ|``"""

	_center: float
	_index:  int

	def __init__(self, center: ndarray, index: int) -> None:
		self._center = float(asarray(center, dtype=float64).reshape(-1)[index])
		self._index = index

	@readonly
	def Center(self) -> float:
		return self._center

	@readonly
	def Index(self) -> int:
		return self._index

	def __call__(self, theta: ndarray) -> float:
		return abs(float(asarray(theta).reshape(-1)[self._index]) - self._center)

	def Values(self, thetas: ndarray) -> ndarray:
		return np_abs(atleast_2d(thetas)[:, self._index] - self._center)


Statistic = Callable[[ndarray], float]


def _StatisticValues(statistic: Statistic, thetas: ndarray) -> ndarray:
	if isinstance(statistic, (QuadraticFormStatistic, AbsoluteDeviationStatistic)):
		return statistic.Values(thetas)
	return asarray([statistic(theta) for theta in thetas], dtype=float64)


@export
def JointRegionThreshold(sample: Sample, statistic: Statistic, alpha: float) -> float:
	"""
	Magnitude ``q_{1−α}`` of the region ``{θ: statistic(θ) ≤ q_{1−α}}``: the empirical ``(1 − α)`` quantile of the
	statistic over the sample.
	"""
	CheckProbability(alpha, "alpha")
	return EmpiricalQuantile(_StatisticValues(statistic, _Thetas(sample)), 1.0 - alpha)


@export
def MarginalInterval(sample: Sample, index: int, alpha: float, center: Nullable[ndarray] = None) -> Tuple[float, float]:
	"""``θ̂ⱼ ± q`` with ``q`` the empirical ``(1 − α)`` quantile of ``|θ*ⱼ − θ̂ⱼ|``."""
	CheckProbability(alpha, "alpha")
	statistic = AbsoluteDeviationStatistic(_Center(sample, center), index)
	q = EmpiricalQuantile(statistic.Values(_Thetas(sample)), 1.0 - alpha)
	middle = statistic.Center
	return middle - q, middle + q


def _ScalarDraws(pool: Sequence[CandidateDraw]) -> Sequence[CandidateDraw]:
	if len(pool) == 0:
		raise EmptyPoolError(f"Pool is empty.")
	elif any(draw.ThetaStar.size != 1 for draw in pool):
		raise ValueError(f"Interval from a pool requires a scalar parameter.")
	return pool


@export
def LossOrderInterval(pool: Sequence[CandidateDraw], alpha: float) -> Tuple[float, float]:
	"""
	Range of the candidates whose loss on the observed data lies within the lowest ``(1 − α)`` quantile of the pool's
	losses.
	"""
	CheckProbability(alpha, "alpha")
	draws = _ScalarDraws(pool)
	threshold = EmpiricalQuantile((draw.LossAtData for draw in draws), 1.0 - alpha)
	survivors = [float(draw.ThetaStar[0]) for draw in draws if draw.LossAtData <= threshold]
	if len(survivors) == 0:
		raise EmptyPoolError(f"No candidate within the loss threshold {threshold}.")

	return min(survivors), max(survivors)


@export
def ContourOrderThreshold(pool: Sequence[CandidateDraw], alpha: float) -> float:
	"""Empirical ``α`` quantile of the pool's contour values; the region keeps candidates at or above it."""
	CheckProbability(alpha, "alpha")
	if len(pool) == 0:
		raise EmptyPoolError(f"Pool is empty.")
	elif any(draw.UValue is None for draw in pool):
		raise ValueError(f"Pool entries without contour values.")

	return EmpiricalQuantile((draw.UValue for draw in pool), alpha)


@export
def ContourOrderInterval(pool: Sequence[CandidateDraw], alpha: float) -> Tuple[float, float]:
	"""Range of the scalar candidates kept by :func:`ContourOrderThreshold`."""
	threshold = ContourOrderThreshold(_ScalarDraws(pool), alpha)
	kept = [float(draw.ThetaStar[0]) for draw in pool if draw.UValue >= threshold]
	return min(kept), max(kept)


# ---------------------------------------------------------------------------------------------------------------------
# Baselines and oracles
# ---------------------------------------------------------------------------------------------------------------------
@export
def StandardBootstrap(subject: Union[ModelSpec, Association], data: Dataset, count: int, rng: RngStream, workers: int = 1) -> CandidatePool:
	"""Pairs bootstrap: the m-out-of-n pool at ``m = n`` without inner simulations."""
	association = AsAssociation(subject)
	center = association.Model.CachedFit(data)
	draws = MOutOfNPool(association, data, data.Size, count, 0, rng, workers=workers)
	return CandidatePool(vstack([draw.ThetaStar for draw in draws]), center, SampleMethod.StandardBootstrap, draws=draws)


def _RefitAll(model: ModelSpec, data: Dataset, responses: Callable[[int], ndarray], count: int, workers: int) -> ndarray:
	thetaHat = model.CachedFit(data)
	return vstack(ParallelMap(
		lambda b: model.Fit(data.WithResponse(responses(b), meta="bootstrap"), warmStart=thetaHat),
		range(count),
		workers
	))


@export
def ResidualBootstrap(model: ModelSpec, data: Dataset, count: int, rng: RngStream, workers: int = 1) -> CandidatePool:
	"""
	Residual bootstrap: ``ỹ = Xβ̂ + ẽ`` with ``ẽ`` drawn with replacement from the centered residuals of the fit.

	On Lasso fits no debiasing is applied and the pool is labelled ``residual (non-debiased)``.
	"""
	if count < 1:
		raise EmptyPoolError(f"Residual bootstrap with {count} replicates.")
	elif not isinstance(model, (LinearRegressionModel, LassoModel)):
		raise TypeError(f"Residual bootstrap needs a linear model family, got '{model.Name}'.")

	x = RequireDesign(data)
	thetaHat = model.CachedFit(data)
	fitted = x.Entries @ model.Coefficients(thetaHat)
	residuals = data.Y - fitted
	residuals = residuals - residuals.mean()

	def response(b: int) -> ndarray:
		return fitted + rng.Child(b).Generator().choice(residuals, size=data.Size, replace=True)

	label = "residual (non-debiased)" if isinstance(model, LassoModel) else str(SampleMethod.ResidualBootstrap)
	return CandidatePool(_RefitAll(model, data, response, count, workers), thetaHat, SampleMethod.ResidualBootstrap, label)


@export
def ParametricBootstrap(model: ModelSpec, data: Dataset, count: int, noise: str, rng: RngStream, workers: int = 1) -> CandidatePool:
	"""
	Parametric bootstrap ``Y* = Xβ̂ + σ̂ε`` with ``σ̂² = RSS/(n − p)`` of the least-squares fit.

	``noise`` is ``gaussian`` (``ε ~ N(0, I)``) or ``student_t`` (``ε ~ t_n(0, I, n − p)`` with a shared denominator).
	"""
	if noise not in ("gaussian", "student_t"):
		raise ValueError(f"Unknown noise distribution '{noise}', expected 'gaussian' or 'student_t'.")
	elif count < 1:
		raise EmptyPoolError(f"Parametric bootstrap with {count} replicates.")

	x = RequireDesign(data)
	n, p = x.Rows, x.Columns
	if n <= p:
		raise DegenerateError(f"Residual variance needs n > p (n = {n}, p = {p}).")

	beta = LeastSquares(x, data.Y)
	residual = data.Y - x.Entries @ beta
	sigmaHat = (float(residual @ residual) / (n - p)) ** 0.5
	fitted = x.Entries @ beta

	if noise == "gaussian":
		def response(b: int) -> ndarray:
			return fitted + sigmaHat * rng.Child(b).Generator().standard_normal(n)
		method = SampleMethod.ParametricGaussian
	else:
		def response(b: int) -> ndarray:
			return fitted + sigmaHat * StudentTVectorSample(n, n - p, rng.Child(b))
		method = SampleMethod.ParametricT

	return CandidatePool(_RefitAll(model, data, response, count, workers), model.CachedFit(data), method)


@export
def FiducialOracleSample(data: Dataset, count: int, knownSigma: Nullable[float], rng: RngStream) -> CandidatePool:
	"""
	Draws from the exact confidence distribution of the regression coefficients.

	With known ``σ`` it is ``N_p(β̂, σ²(X'X)⁻¹)``, otherwise ``t_p(β̂, σ̂²(X'X)⁻¹, n − p)`` with ``σ̂² = RSS/(n − p)``.
	Both use ``X = QR``, so ``β̂ + σR⁻¹z`` has covariance ``σ²(X'X)⁻¹``.
	"""
	if count < 1:
		raise EmptyPoolError(f"Fiducial oracle sample with {count} draws.")

	x = RequireDesign(data)
	n, p = x.Rows, x.Columns
	_, r = x.QR
	beta = LeastSquares(x, data.Y)

	if knownSigma is not None:
		if knownSigma <= 0.0:
			raise ValueError(f"Noise level must be positive, got {knownSigma}.")
		scale = knownSigma
		z = rng.Generator().standard_normal((count, p))
	else:
		if n <= p:
			raise DegenerateError(f"Residual variance needs n > p (n = {n}, p = {p}).")
		residual = data.Y - x.Entries @ beta
		scale = (float(residual @ residual) / (n - p)) ** 0.5
		z = StudentTVectorSample(p, n - p, rng, size=count)

	thetas = beta + scale * solve_triangular(r, z.T, lower=False).T
	return CandidatePool(thetas, beta, SampleMethod.Oracle)


# ---------------------------------------------------------------------------------------------------------------------
# Oracle quantile functions
# ---------------------------------------------------------------------------------------------------------------------
@export
def ScaledChiSquareQuantile(level: float, df: int) -> float:
	"""Quantile of ``χ²_df/df``."""
	return ChiSquareQuantile(level, df) / df


@export
def FTypeQuantile(level: float, df: int, dfDenominator: int) -> float:
	"""Quantile of ``χ²_df/(χ²_m/m)``, i.e. ``df·F_{df,m}``."""
	CheckDegreesOfFreedom(df)
	CheckDegreesOfFreedom(dfDenominator)
	CheckProbability(level, "level")
	return df * float(fdtri(df, dfDenominator, level))


@export
def HalfNormalQuantile(level: float, scale: float = 1.0) -> float:
	"""Quantile of ``|N(0, scale²)|``."""
	CheckProbability(level, "level")
	return scale * NormalQuantile(0.5 * (1.0 + level))


@export
def NormalOracleQuantile(level: float, mean: float = 0.0, scale: float = 1.0) -> float:
	return mean + scale * NormalQuantile(level)


# ---------------------------------------------------------------------------------------------------------------------
# Coverage helpers
# ---------------------------------------------------------------------------------------------------------------------
@export
def JointCovered(statistic: Statistic, threshold: float, truth: ndarray) -> bool:
	return statistic(truth) <= threshold


@export
def MarginalCovered(interval: Tuple[float, float], value: float) -> bool:
	return interval[0] <= value <= interval[1]


# ---------------------------------------------------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------------------------------------------------
@export
class InferenceReport(metaclass=ExtendedType, slots=True):
	"""
	Region magnitudes and intervals of one method over a grid of levels.

	``path`` names how the candidates were obtained: ``per-alpha-pool`` (one calibrated pool per level),
	``refined-sample`` (pooled and refined) or ``baseline``.
	"""

	_method:     str
	_path:       str
	_alphaGrid:  List[float]
	_thresholds: Dict[float, float]
	_intervals:  Dict[str, Dict[float, Tuple[float, float]]]
	_notes:      List[str]
	_metadata:   Dict[str, object]

	def __init__(self, method: str, path: str, alphaGrid: Iterable[float] = (), metadata: Nullable[Dict[str, object]] = None) -> None:
		self._method = method
		self._path = path
		self._alphaGrid = list(alphaGrid)
		self._thresholds = {}
		self._intervals = {}
		self._notes = []
		self._metadata = {} if metadata is None else dict(metadata)

	@readonly
	def Method(self) -> str:
		return self._method

	@readonly
	def Path(self) -> str:
		return self._path

	@readonly
	def AlphaGrid(self) -> List[float]:
		return self._alphaGrid

	@readonly
	def Thresholds(self) -> Dict[float, float]:
		return self._thresholds

	@readonly
	def Intervals(self) -> Dict[str, Dict[float, Tuple[float, float]]]:
		return self._intervals

	@readonly
	def Notes(self) -> List[str]:
		return self._notes

	@readonly
	def Metadata(self) -> Dict[str, object]:
		return self._metadata

	def AddThreshold(self, alpha: float, q: float) -> None:
		if alpha not in self._alphaGrid:
			self._alphaGrid.append(alpha)
		self._thresholds[alpha] = q

	def AddInterval(self, coordinate: str, alpha: float, interval: Tuple[float, float]) -> None:
		lower, upper = interval
		if lower > upper:
			raise ValueError(f"Interval endpoints out of order: ({lower}, {upper}).")
		if alpha not in self._alphaGrid:
			self._alphaGrid.append(alpha)
		self._intervals.setdefault(coordinate, {})[alpha] = (float(lower), float(upper))

	@readonly
	def IsNested(self) -> bool:
		"""Thresholds do not increase with ``α`` (regions of higher confidence contain those of lower confidence)."""
		ordered = [self._thresholds[alpha] for alpha in sorted(self._thresholds)]
		return all(a >= b for a, b in zip(ordered, ordered[1:]))

	def ToDict(self) -> Dict[str, object]:
		return {
			"method": self._method,
			"path": self._path,
			"alpha_grid": sorted(self._alphaGrid),
			"thresholds": [{"alpha": alpha, "q": self._thresholds[alpha]} for alpha in sorted(self._thresholds)],
			"intervals": {
				coordinate: [{"alpha": alpha, "lower": lower, "upper": upper} for alpha, (lower, upper) in sorted(intervals.items())]
				for coordinate, intervals in self._intervals.items()
			},
			"notes": list(self._notes)
		}

	def ToTree(self) -> Node:
		node = Node(value=f"{self._method} [{self._path}]")
		if len(self._thresholds) > 0:
			thresholdNode = Node(value="thresholds", parent=node)
			for alpha in sorted(self._thresholds):
				Node(value=f"alpha={alpha:g}: q={self._thresholds[alpha]:.4f}", parent=thresholdNode)
		for coordinate, intervals in self._intervals.items():
			coordinateNode = Node(value=coordinate, parent=node)
			for alpha, (lower, upper) in sorted(intervals.items()):
				Node(value=f"alpha={alpha:g}: ({lower:.4f}, {upper:.4f})", parent=coordinateNode)
		for key, value in self._metadata.items():
			node[key] = value

		return node

	def __repr__(self) -> str:
		return f"InferenceReport({self._method}, {self._path}, levels={len(self._alphaGrid)})"
