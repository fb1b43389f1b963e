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
Association function, its profile variant and contour values.

The association ``T_{y,θ} = ℓ(y, θ̂_y) − ℓ(y, θ)`` is a loss gap and therefore never positive. The contour value
``F_θ(T_{y,θ})`` is the probability that data regenerated from ``P_θ`` produce an association at or below the observed
one. :func:`ContourMC` estimates it by simulation, :func:`ContourExactMean` and
:func:`ContourExactLinRegKnownSigma` evaluate it in closed form.
"""
from typing                        import Optional as Nullable, Union

from numpy                         import ndarray, asarray, float64
from numpy.random                  import Generator

from pyTooling.Decorators          import export, readonly
from pyTooling.MetaClasses         import ExtendedType, abstractmethod

from pyCalibratedBootstrap.MathKit import DomainError, RngStream, NormalCDF, ChiSquareCDF, ParallelMap
from pyCalibratedBootstrap.Models  import Dataset, ModelSpec, UnsupportedProfileError


@export
class ContourValue(metaclass=ExtendedType, slots=True):
	"""Association and (estimated) contour value of one parameter value."""

	_theta:  ndarray
	_tValue: float
	_uValue: float
	_nMC:    int

	def __init__(self, theta: ndarray, tValue: float, uValue: float, nMC: int) -> None:
		if tValue > 1e-12:
			raise ValueError(f"Association value must not be positive, got {tValue}.")
		elif not (0.0 <= uValue <= 1.0):
			raise ValueError(f"Contour value must be a probability, got {uValue}.")

		self._theta = theta
		self._tValue = tValue
		self._uValue = uValue
		self._nMC = nMC

	@readonly
	def Theta(self) -> ndarray:
		return self._theta

	@readonly
	def TValue(self) -> float:
		return self._tValue

	@readonly
	def UValue(self) -> float:
		return self._uValue

	@readonly
	def NMC(self) -> int:
		"""Number of Monte-Carlo replicates, ``0`` for exact values."""
		return self._nMC

	def __repr__(self) -> str:
		return f"ContourValue(t={self._tValue:.6g}, u={self._uValue:.4f}, N={self._nMC})"


@export
def TStat(model: ModelSpec, data: Dataset, theta: ndarray) -> float:
	"""
	Association ``ℓ(data, θ̂_data) − ℓ(data, θ)``.

	The fit ``θ̂_data`` is cached in ``data``. Positive gaps can only stem from solver tolerances and are clamped to 0.
	"""
	thetaHat = model.CachedFit(data)
	return min(model.Loss(data, thetaHat) - model.Loss(data, theta), 0.0)


@export
def TStatProfile(model: ModelSpec, data: Dataset, index: int, value: float) -> float:
	"""
	Profile association ``ℓ(data, θ̂_data) − ℓ(data, θ̃)`` where ``θ̃`` minimizes the loss with component ``index``
	pinned to ``value``.

	:raises UnsupportedProfileError: If the model has no profile fit.
	"""
	if not model.SupportsProfile:
		raise UnsupportedProfileError(f"Model '{model.Name}' does not support profile associations.")

	thetaHat = model.CachedFit(data)
	restricted = model.ProfileFit(data, index, value, warmStart=thetaHat)
	return min(model.Loss(data, thetaHat) - model.Loss(data, restricted), 0.0)


@export
class Association(metaclass=ExtendedType, slots=True):
	"""
	The statistic the calibration runs against.

	Besides the statistic itself it knows which part of a parameter vector is reported (:meth:`Target`).
	"""

	_model: ModelSpec

	def __init__(self, model: ModelSpec) -> None:
		self._model = model

	@readonly
	def Model(self) -> ModelSpec:
		return self._model

	@abstractmethod
	def Statistic(self, data: Dataset, theta: ndarray) -> float:
		"""Association value of ``theta`` for ``data``."""

	@abstractmethod
	def Target(self, theta: ndarray) -> ndarray:
		"""Components of ``theta`` the association is about."""

	@abstractmethod
	def Description(self) -> str:
		"""Short label used in reports."""


@export
class FullAssociation(Association):
	"""Association for the whole parameter vector."""

	def Statistic(self, data: Dataset, theta: ndarray) -> float:
		return TStat(self._model, data, theta)

	def Target(self, theta: ndarray) -> ndarray:
		return asarray(theta, dtype=float64).reshape(-1)

	def Description(self) -> str:
		return f"full({self._model.Name})"


@export
class ProfileAssociation(Association):
	"""Profile association for one component, the other components being minimized out."""

	_index: int

	def __init__(self, model: ModelSpec, index: int) -> None:
		if not model.SupportsProfile:
			raise UnsupportedProfileError(f"Model '{model.Name}' does not support profile associations.")

		super().__init__(model)
		self._index = index

	@readonly
	def Index(self) -> int:
		return self._index

	def Statistic(self, data: Dataset, theta: ndarray) -> float:
		return TStatProfile(self._model, data, self._index, float(asarray(theta).reshape(-1)[self._index]))

	def Target(self, theta: ndarray) -> ndarray:
		return asarray(theta, dtype=float64).reshape(-1)[[self._index]]

	def Description(self) -> str:
		return f"profile({self._model.Name}, index={self._index})"


@export
def AsAssociation(subject: Union[ModelSpec, Association]) -> Association:
	"""Wrap a bare model into its :class:`FullAssociation`."""
	if isinstance(subject, Association):
		return subject
	return FullAssociation(subject)


@export
def ContourMC(
	subject: Union[ModelSpec, Association],
	data: Dataset,
	theta: ndarray,
	count: int,
	rng: RngStream,
	workers: int = 1
) -> ContourValue:
	"""
	Monte-Carlo contour value ``(1/N)·Σ 𝟙(T_{y⁽ⁱ⁾,θ} ≤ T_{y,θ})``.

	Replicate ``i`` is simulated from ``P_θ`` with the child stream ``rng.Child(i)``, keeping the design of ``data``.
	Ties count as undershoots. The result does not depend on ``workers``.
	"""
	if count < 1:
		raise ValueError(f"Number of Monte-Carlo replicates must be at least 1, got {count}.")

	association = AsAssociation(subject)
	model = association.Model
	vector = asarray(theta, dtype=float64).reshape(-1)
	observed = association.Statistic(data, vector)

	def undershoot(index: int) -> bool:
		replicate = model.Simulate(vector, data, rng.Child(index))
		return association.Statistic(replicate, vector) <= observed

	hits = sum(ParallelMap(undershoot, range(count), workers))
	return ContourValue(vector, observed, hits / count, count)


@export
def ContourExactMean(t: float) -> float:
	"""Exact contour ``2Φ(−√(−2t))`` of the normal mean with unit variance."""
	if t > 0.0:
		raise DomainError(f"Association value must not be positive, got {t}.")

	return 2.0 * NormalCDF(-(-2.0 * t) ** 0.5)


@export
def ContourExactLinRegKnownSigma(t: float, p: int, variance: float) -> float:
	"""Exact contour ``P(χ²_p ≥ −2t/σ²)`` of linear regression with known noise level."""
	if t > 0.0:
		raise DomainError(f"Association value must not be positive, got {t}.")
	elif variance <= 0.0:
		raise DomainError(f"Variance must be positive, got {variance}.")

	return 1.0 - ChiSquareCDF(-2.0 * t / variance, p)
