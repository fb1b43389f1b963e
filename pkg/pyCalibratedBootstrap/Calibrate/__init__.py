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
Resampling approximation.

For a significance level ``α`` a Robbins-Monro iteration searches the resample size ``m`` for which the contour values
of m-out-of-n bootstrap estimates undershoot ``α`` with probability ``α``:

#. ``m = ⌊m⁽ᵗ⁾⌋ + Bernoulli(m⁽ᵗ⁾ − ⌊m⁽ᵗ⁾⌋)``, resample ``m`` rows and fit ``θ̂*``,
#. evaluate ``ℓ⁽ᵗ⁾ = T_{y,θ̂*}`` on the observed data,
#. simulate ``B`` datasets from ``P_θ̂*``, count ``P = #{b: T_{y⁽ᵇ⁾,θ̂*} ≤ ℓ⁽ᵗ⁾}``,
#. ``Zₜ = (𝟙{P/B ≤ α} − α)/√(Bα(1 − α))`` and ``m⁽ᵗ⁺¹⁾ = m⁽ᵗ⁾ + c/(t + 1)·Zₜ``, clipped to ``[M_l, M_u]``.

After ``T`` iterations ``⌊m⁽ᵀ⁾⌋ − 1`` is returned together with the trace and every candidate drawn on the way.
"""
from math                          import floor, sqrt
from typing                        import List, Optional as Nullable, Tuple, Union

from numpy                         import ndarray, arange, float64
from numpy.random                  import Generator

from pyTooling.Decorators          import export, readonly
from pyTooling.MetaClasses         import ExtendedType

from pyCalibratedBootstrap         import CalibratedBootstrapException
from pyCalibratedBootstrap.MathKit import RngStream, AsGenerator, DomainError, DegenerateError, NonConvergenceError, RankDeficiencyError
from pyCalibratedBootstrap.MathKit import ChiSquareCDF, ChiSquareDensity, ChiSquareQuantile, ParallelMap
from pyCalibratedBootstrap.Models  import Dataset, ModelSpec
from pyCalibratedBootstrap.Contour import Association, AsAssociation


@export
class CalibrationException(CalibratedBootstrapException):
	"""Raised for invalid calibration settings or when a calibration step fails repeatedly."""


@export
class RaConfig(metaclass=ExtendedType, slots=True):
	"""
	Settings of one resampling approximation run.

	Settings depending on the data (step constant ``c = d·n``, clip bounds, start value) may be left open; :meth:`Resolve`
	fills them in with ``M_l = max(p + 2, 5)``, ``M_u = 10n`` and ``m0 = n``.
	"""

	_alpha:        float
	_innerCount:   int
	_stepScale:    float
	_stepConstant: Nullable[float]
	_iterations:   int
	_lowerClip:    Nullable[int]
	_upperClip:    Nullable[int]
	_initial:      Nullable[float]

	def __init__(
		self,
		alpha: float,
		innerCount: int = 10,
		stepScale: float = 10.0,
		iterations: int = 100,
		lowerClip: Nullable[int] = None,
		upperClip: Nullable[int] = None,
		initial: Nullable[float] = None,
		stepConstant: Nullable[float] = None
	) -> None:
		if not (0.0 < alpha < 1.0):
			raise CalibrationException(f"Significance level must be in (0, 1), got {alpha}.")
		elif innerCount < 1:
			raise CalibrationException(f"Inner Monte-Carlo count B must be at least 1, got {innerCount}.")
		elif iterations < 1:
			raise CalibrationException(f"Iteration budget T must be at least 1, got {iterations}.")
		elif stepScale < 0.0 or (stepConstant is not None and stepConstant < 0.0):
			raise CalibrationException(f"Step constants must be non-negative.")

		self._alpha = alpha
		self._innerCount = innerCount
		self._stepScale = stepScale
		self._stepConstant = stepConstant
		self._iterations = iterations
		self._lowerClip = lowerClip
		self._upperClip = upperClip
		self._initial = initial

		self._CheckClipping()

	def _CheckClipping(self) -> None:
		lower, upper, initial = self._lowerClip, self._upperClip, self._initial
		if lower is not None and lower < 1:
			raise CalibrationException(f"Lower clip M_l must be a positive integer, got {lower}.")
		elif lower is not None and upper is not None and lower > upper:
			raise CalibrationException(f"Lower clip M_l={lower} exceeds upper clip M_u={upper}.")
		elif initial is not None:
			if lower is not None and initial < lower:
				ex = CalibrationException(f"Start value m0={initial} is below M_l={lower}.")
				ex.add_note(f"Valid settings satisfy 1 <= M_l <= m0 <= M_u.")
				raise ex
			elif upper is not None and initial > upper:
				ex = CalibrationException(f"Start value m0={initial} is above M_u={upper}.")
				ex.add_note(f"Valid settings satisfy 1 <= M_l <= m0 <= M_u.")
				raise ex

	@readonly
	def Alpha(self) -> float:
		return self._alpha

	@readonly
	def InnerCount(self) -> int:
		"""Number ``B`` of inner simulations per step."""
		return self._innerCount

	@readonly
	def StepScale(self) -> float:
		"""Factor ``d`` in ``c = d·n``."""
		return self._stepScale

	@readonly
	def StepConstant(self) -> Nullable[float]:
		return self._stepConstant

	@readonly
	def Iterations(self) -> int:
		return self._iterations

	@readonly
	def LowerClip(self) -> Nullable[int]:
		return self._lowerClip

	@readonly
	def UpperClip(self) -> Nullable[int]:
		return self._upperClip

	@readonly
	def Initial(self) -> Nullable[float]:
		return self._initial

	@readonly
	def IsResolved(self) -> bool:
		return None not in (self._stepConstant, self._lowerClip, self._upperClip, self._initial)

	def Resolve(self, n: int, p: int = 1) -> "RaConfig":
		"""Fill the data dependent settings for ``n`` observations and a ``p`` dimensional parameter."""
		lower = self._lowerClip if self._lowerClip is not None else max(p + 2, 5)
		upper = self._upperClip if self._upperClip is not None else 10 * n
		initial = self._initial if self._initial is not None else float(n)
		return RaConfig(
			self._alpha,
			self._innerCount,
			self._stepScale,
			self._iterations,
			lower,
			max(upper, lower),
			min(max(initial, lower), max(upper, lower)),
			self._stepConstant if self._stepConstant is not None else self._stepScale * n
		)

	def WithAlpha(self, alpha: float) -> "RaConfig":
		return RaConfig(alpha, self._innerCount, self._stepScale, self._iterations, self._lowerClip, self._upperClip, self._initial, self._stepConstant)

	def ToDict(self) -> dict:
		return {
			"alpha": self._alpha,
			"B": self._innerCount,
			"d": self._stepScale,
			"c": self._stepConstant,
			"T": self._iterations,
			"M_l": self._lowerClip,
			"M_u": self._upperClip,
			"m0": self._initial
		}


@export
class CandidateDraw(metaclass=ExtendedType, slots=True):
	"""One bootstrapped estimate with its association, contour value and loss on the observed data."""

	_thetaStar:  ndarray
	_mUsed:      int
	_tValue:     float
	_uValue:     Nullable[float]
	_lossAtData: float
	_alpha:      Nullable[float]
	_iteration:  Nullable[int]

	def __init__(
		self,
		thetaStar: ndarray,
		mUsed: int,
		tValue: float,
		uValue: Nullable[float],
		lossAtData: float,
		alpha: Nullable[float] = None,
		iteration: Nullable[int] = None
	) -> None:
		if tValue > 1e-12:
			raise ValueError(f"Association value must not be positive, got {tValue}.")
		elif uValue is not None and not (0.0 <= uValue <= 1.0):
			raise ValueError(f"Contour value must be a probability, got {uValue}.")

		self._thetaStar = thetaStar
		self._mUsed = mUsed
		self._tValue = tValue
		self._uValue = uValue
		self._lossAtData = lossAtData
		self._alpha = alpha
		self._iteration = iteration

	@readonly
	def ThetaStar(self) -> ndarray:
		return self._thetaStar

	@readonly
	def MUsed(self) -> int:
		return self._mUsed

	@readonly
	def TValue(self) -> float:
		return self._tValue

	@readonly
	def UValue(self) -> Nullable[float]:
		"""Contour value, ``None`` for pools drawn without inner simulations."""
		return self._uValue

	@readonly
	def LossAtData(self) -> float:
		return self._lossAtData

	@readonly
	def Alpha(self) -> Nullable[float]:
		"""Significance level of the calibration run that produced this draw."""
		return self._alpha

	@readonly
	def Iteration(self) -> Nullable[int]:
		return self._iteration

	def __repr__(self) -> str:
		u = "-" if self._uValue is None else f"{self._uValue:.3f}"
		return f"CandidateDraw(m={self._mUsed}, t={self._tValue:.4g}, u={u})"


@export
class TraceRecord(metaclass=ExtendedType, slots=True):
	_iteration: int
	_mReal:     float
	_mInt:      int
	_uValue:    float
	_z:         float

	def __init__(self, iteration: int, mReal: float, mInt: int, uValue: float, z: float) -> None:
		self._iteration = iteration
		self._mReal = mReal
		self._mInt = mInt
		self._uValue = uValue
		self._z = z

	@readonly
	def Iteration(self) -> int:
		return self._iteration

	@readonly
	def MReal(self) -> float:
		return self._mReal

	@readonly
	def MInt(self) -> int:
		return self._mInt

	@readonly
	def UValue(self) -> float:
		return self._uValue

	@readonly
	def Z(self) -> float:
		return self._z


@export
class CalibrationTrace(metaclass=ExtendedType, slots=True):
	"""Per-iteration record of one resampling approximation run."""

	_alpha:      float
	_iterations: int
	_records:    List[TraceRecord]
	_mAlpha:     Nullable[int]
	_clipCount:  int
	_notes:      List[str]

	def __init__(self, alpha: float, iterations: int) -> None:
		if iterations < 1:
			raise CalibrationException(f"Iteration budget T must be at least 1, got {iterations}.")

		self._alpha = alpha
		self._iterations = iterations
		self._records = []
		self._mAlpha = None
		self._clipCount = 0
		self._notes = []

	@readonly
	def Alpha(self) -> float:
		return self._alpha

	@readonly
	def Iterations(self) -> int:
		"""Iteration budget ``T`` of the run."""
		return self._iterations

	@readonly
	def Records(self) -> Tuple[TraceRecord, ...]:
		return tuple(self._records)

	@readonly
	def MAlpha(self) -> Nullable[int]:
		return self._mAlpha

	@readonly
	def Converged(self) -> bool:
		"""The run finished and recorded every iteration of its budget."""
		return self._mAlpha is not None and len(self._records) == self._iterations

	@readonly
	def ClipCount(self) -> int:
		return self._clipCount

	@readonly
	def Notes(self) -> List[str]:
		"""Step notes (retried resamples); calibration steps append to this list."""
		return self._notes

	@readonly
	def TailStandardDeviation(self) -> float:
		"""Standard deviation of ``m⁽ᵗ⁾`` over the last quarter of the iterations."""
		tail = [record.MReal for record in self._records[-max(len(self._records) // 4, 1):]]
		if len(tail) < 2:
			return 0.0
		mean = sum(tail) / len(tail)
		return sqrt(sum((m - mean) ** 2 for m in tail) / (len(tail) - 1))

	def Append(self, record: TraceRecord, clipped: bool = False) -> None:
		"""Record one iteration; ``clipped`` marks an update projected onto ``[M_l, M_u]``."""
		if self._mAlpha is not None:
			raise CalibrationException(f"Calibration trace for alpha={self._alpha} is already finished.")
		elif len(self._records) >= self._iterations:
			raise CalibrationException(f"Calibration trace for alpha={self._alpha} exceeds its budget of {self._iterations} iterations.")

		self._records.append(record)
		if clipped:
			self._clipCount += 1

	def Finish(self, mAlpha: int) -> int:
		"""Store the calibrated resample size and return it."""
		if self._mAlpha is not None:
			raise CalibrationException(f"Calibration trace for alpha={self._alpha} is already finished.")

		self._mAlpha = mAlpha
		return mAlpha

	def __len__(self) -> int:
		return len(self._records)


@export
def StepSizes(stepConstant: float, count: int) -> ndarray:
	"""Robbins-Monro gains ``c/(t + 1)`` for ``t = 0 … count − 1``."""
	return stepConstant / (arange(count, dtype=float64) + 1.0)


@export
def ResampleMOutOfN(data: Dataset, m: int, rng: Union[RngStream, Generator]) -> Dataset:
	"""Draw ``m`` rows uniformly with replacement (paired rows for regression data)."""
	if m < 1:
		raise ValueError(f"Resample size must be at least 1, got {m}.")

	rows = AsGenerator(rng).integers(0, data.Size, size=m)
	return data.Take(rows, meta=f"m-out-of-n(m={m})")


@export
def RandomizedRound(mReal: float, rng: Union[RngStream, Generator]) -> int:
	"""``⌊m⌋ + Bernoulli(m − ⌊m⌋)``; the expectation equals ``m``."""
	if mReal < 0.0:
		raise DomainError(f"Resample size must be non-negative, got {mReal}.")

	lower = floor(mReal)
	fraction = mReal - lower
	if fraction == 0.0:
		return int(lower)
	return int(lower) + int(AsGenerator(rng).random() < fraction)


_RETRYABLE = (RankDeficiencyError, NonConvergenceError, DegenerateError)


def _DrawCandidate(
	association: Association,
	data: Dataset,
	m: int,
	innerCount: int,
	rng: RngStream,
	notes: Nullable[List[str]],
	alpha: Nullable[float] = None,
	iteration: Nullable[int] = None,
	workers: int = 1
) -> CandidateDraw:
	model = association.Model
	thetaHat = model.CachedFit(data)

	thetaStar = None
	for attempt in range(2):
		resample = ResampleMOutOfN(data, m, rng.Child(0).Child(attempt))
		try:
			thetaStar = model.Fit(resample, warmStart=thetaHat)
			break
		except _RETRYABLE as ex:
			if attempt == 1:
				newEx = CalibrationException(f"Fit of an m-out-of-n resample (m={m}) failed twice.")
				newEx.add_note(f"Last failure: {ex}")
				raise newEx from ex
			elif notes is not None:
				notes.append(f"Retried resample at m={m}: {ex}")

	observed = association.Statistic(data, thetaStar)
	uValue = None
	if innerCount > 0:
		simulations = rng.Child(1)

		def undershoot(b: int) -> bool:
			replicate = model.Simulate(thetaStar, data, simulations.Child(b))
			return association.Statistic(replicate, thetaStar) <= observed

		uValue = sum(ParallelMap(undershoot, range(innerCount), workers)) / innerCount

	return CandidateDraw(thetaStar, m, observed, uValue, model.Loss(data, thetaStar), alpha, iteration)


@export
def RAStep(
	subject: Union[ModelSpec, Association],
	data: Dataset,
	m: int,
	config: RaConfig,
	rng: RngStream,
	notes: Nullable[List[str]] = None,
	iteration: Nullable[int] = None,
	workers: int = 1
) -> Tuple[CandidateDraw, float]:
	"""
	One step of the resampling approximation at resample size ``m``.

	Inner simulation ``b`` uses ``rng.Child(1).Child(b)``; with ``workers > 1`` they run in a thread pool and the result
	does not depend on the worker count. Failing fits of the resample are retried once with a fresh resample (noted in
	``notes``), then surfaced as :exc:`CalibrationException`.
	"""
	if config.LowerClip is not None and config.UpperClip is not None and not (config.LowerClip <= m <= config.UpperClip):
		raise CalibrationException(f"Resample size m={m} outside of [{config.LowerClip}, {config.UpperClip}].")

	association = AsAssociation(subject)
	alpha = config.Alpha
	innerCount = config.InnerCount
	draw = _DrawCandidate(association, data, m, innerCount, rng, notes, alpha, iteration, workers)

	indicator = 1.0 if draw.UValue <= alpha else 0.0
	z = (indicator - alpha) / sqrt(innerCount * alpha * (1.0 - alpha))
	return draw, z


@export
def RARun(
	subject: Union[ModelSpec, Association],
	data: Dataset,
	config: RaConfig,
	rng: RngStream,
	workers: int = 1
) -> Tuple[int, CalibrationTrace, List[CandidateDraw]]:
	"""
	Resampling approximation for the level ``config.Alpha``.

	Iteration ``t`` uses ``rng.Child(t)``: child 0 for the randomized rounding, child 1 for the step. ``workers`` is
	handed to :func:`RAStep` for the inner simulations. Returns ``max(⌊m⁽ᵀ⁾⌋ − 1, M_l)``, the trace and all candidates in
	iteration order.
	"""
	association = AsAssociation(subject)
	model = association.Model
	resolved = config if config.IsResolved else config.Resolve(data.Size, model.ParameterDimension(data))

	lower = resolved.LowerClip
	upper = resolved.UpperClip
	stepConstant = resolved.StepConstant
	trace = CalibrationTrace(resolved.Alpha, resolved.Iterations)
	pool: List[CandidateDraw] = []

	mReal = float(resolved.Initial)
	for t in range(resolved.Iterations):
		iterationStream = rng.Child(t)
		mInt = min(max(RandomizedRound(mReal, iterationStream.Child(0)), lower), upper)
		draw, z = RAStep(association, data, mInt, resolved, iterationStream.Child(1), trace.Notes, t, workers)
		pool.append(draw)

		record = TraceRecord(t, mReal, mInt, draw.UValue, z)
		proposal = mReal + stepConstant / (t + 1) * z
		if proposal >= upper:
			mReal = float(upper)
		elif proposal < lower:
			mReal = float(lower)
		else:
			mReal = proposal
		trace.Append(record, clipped=(proposal >= upper or proposal < lower))

	return trace.Finish(max(floor(mReal) - 1, lower)), trace, pool


@export
def MOutOfNPool(
	subject: Union[ModelSpec, Association],
	data: Dataset,
	m: int,
	count: int,
	innerCount: int,
	rng: RngStream,
	alpha: Nullable[float] = None,
	workers: int = 1,
	notes: Nullable[List[str]] = None
) -> List[CandidateDraw]:
	"""
	``count`` candidates at fixed resample size ``m``, each with a contour value from ``innerCount`` inner simulations
	(no contour values when ``innerCount`` is 0). Candidate ``i`` uses ``rng.Child(i)``.
	"""
	if count < 1:
		raise ValueError(f"Pool size must be at least 1, got {count}.")

	association = AsAssociation(subject)
	association.Model.CachedFit(data)

	return ParallelMap(lambda i: _DrawCandidate(association, data, m, innerCount, rng.Child(i), notes, alpha), range(count), workers)


@export
def EstimateUndershoot(
	subject: Union[ModelSpec, Association],
	data: Dataset,
	m: int,
	alpha: float,
	draws: int,
	innerCount: int,
	rng: RngStream,
	workers: int = 1
) -> float:
	"""Monte-Carlo estimate of ``f^α(m) = P(u ≤ α)`` at resample size ``m``."""
	pool = MOutOfNPool(subject, data, m, draws, innerCount, rng, alpha, workers)
	return sum(1 for draw in pool if draw.UValue <= alpha) / len(pool)


@export
def GaussianApproxMStar(n: int, c: float = 1.0) -> int:
	"""Root ``⌊n/c⌋`` of the Gaussian approximation of ``f^α(m) = α``."""
	if c <= 0.0:
		raise DomainError(f"Contour scale must be positive, got {c}.")
	return max(floor(n / c), 1)


@export
def GaussianApproxUndershoot(n: int, p: int, m: int, alpha: float, c: float = 1.0) -> float:
	"""Gaussian approximation ``1 − P(χ²_p > (n/m)·χ²_{1−α,p}/c)`` of the undershoot probability."""
	quantile = ChiSquareQuantile(1.0 - alpha, p)
	return ChiSquareCDF(n / m * quantile / c, p)


@export
def CalibrationErrorBound(n: int, p: int, alpha: float, mStar: Nullable[int] = None) -> float:
	"""
	Upper bound ``χ²_p(χ²_{1−α,p})·χ²_{1−α,p}/m*`` on the change of ``f^α`` between neighbouring resample sizes at the
	approximate root ``m*``.

	Without ``mStar`` the root of the Gaussian approximation for ``n`` observations is used (:func:`GaussianApproxMStar`).
	"""
	if n < 1:
		raise DomainError(f"Sample size must be at least 1, got {n}.")
	elif mStar is None:
		mStar = GaussianApproxMStar(n)
	elif mStar < 1:
		raise DomainError(f"Resample size m* must be at least 1, got {mStar}.")

	quantile = ChiSquareQuantile(1.0 - alpha, p)
	return ChiSquareDensity(quantile, p) * quantile / mStar
