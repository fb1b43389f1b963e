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
Parametric model families.

Every family bundles a loss ``ℓ(y, θ)`` (negative log-likelihood plus an optional penalty), the loss minimizer
(:meth:`ModelSpec.Fit`) and forward simulation from ``P_θ`` (:meth:`ModelSpec.Simulate`). Regression families
simulate with the regressors of the observed data (fixed design). Parameters are always one-dimensional
:class:`numpy.ndarray` vectors, also for scalar families.

.. rubric:: Families

* :class:`GaussianMeanModel` - ``N(θ, σ²)`` with known variance.
* :class:`LinearRegressionModel` - ``Y = Xβ + σε`` with known or unknown ``σ``.
* :class:`LassoModel` - ``½‖y − Xβ‖² + λΣ|βⱼ|`` with a fixed simulation variance.
* :class:`SoftThresholdMeanModel` - ``½Σ(yᵢ − θ)² + λ|θ|``.
* :class:`VonMisesModel` - circular location with known concentration.
"""
from math                    import atan2, hypot, log, pi
from sys                     import version_info
from typing                  import Any, Callable, Dict, Optional as Nullable, Tuple, Union

from numpy                   import ndarray, array, asarray, abs as np_abs, cos, float64, insert, sign, sin
from numpy.random            import Generator

from pyTooling.Common        import getFullyQualifiedName
from pyTooling.Decorators    import export, readonly
from pyTooling.MetaClasses   import ExtendedType, abstractmethod

from pyCalibratedBootstrap   import CalibratedBootstrapException
from pyCalibratedBootstrap.MathKit import RngStream, DesignMatrix, DegenerateError, AsGenerator
from pyCalibratedBootstrap.MathKit import LeastSquares, LassoFit, VonMisesSample


@export
class ModelException(CalibratedBootstrapException):
	"""Base-class for model related errors."""


@export
class UnsupportedProfileError(ModelException):
	"""Raised when a profile fit is requested from a family that does not provide one."""


@export
class Dataset(metaclass=ExtendedType, slots=True):
	"""
	An observed (or simulated) sample.

	Fits are cached per dataset object and model key, so repeated association evaluations on the same data do not refit.
	Simulated datasets remember the parameter they were drawn from (:attr:`Origin`); iterative solvers use it as warm
	start.
	"""

	_y:        ndarray
	_x:        Nullable[DesignMatrix]
	_meta:     str
	_origin:   Nullable[ndarray]
	_fitCache: Dict[str, ndarray]

	def __init__(self, y: Any, x: Nullable[DesignMatrix] = None, meta: str = "", origin: Nullable[ndarray] = None) -> None:
		response = asarray(y, dtype=float64)
		if response.ndim != 1:
			raise ValueError(f"Response must be a vector, got {response.ndim} dimensions.")
		elif response.size == 0:
			raise ValueError(f"Dataset must not be empty.")

		if x is not None:
			if not isinstance(x, DesignMatrix):
				ex = TypeError(f"Parameter 'x' is not of type 'DesignMatrix'.")
				if version_info >= (3, 11):  # pragma: no cover
					ex.add_note(f"Got type '{getFullyQualifiedName(x)}'.")
				raise ex
			elif x.Rows != response.size:
				raise ValueError(f"Design has {x.Rows} rows but the response has {response.size} entries.")

		response = response.copy()
		response.setflags(write=False)

		self._y = response
		self._x = x
		self._meta = meta
		self._origin = origin
		self._fitCache = {}

	@readonly
	def Y(self) -> ndarray:
		return self._y

	@readonly
	def X(self) -> Nullable[DesignMatrix]:
		return self._x

	@readonly
	def Meta(self) -> str:
		return self._meta

	@readonly
	def Origin(self) -> Nullable[ndarray]:
		return self._origin

	@readonly
	def Size(self) -> int:
		return self._y.size

	def Take(self, rows: ndarray, meta: str = "resample") -> "Dataset":
		"""Paired selection of rows (response and regressors)."""
		x = None if self._x is None else self._x.Take(rows)
		return Dataset(self._y[rows], x, meta)

	def WithResponse(self, y: ndarray, meta: str = "simulated", origin: Nullable[ndarray] = None) -> "Dataset":
		"""A new dataset sharing this dataset's design matrix object."""
		return Dataset(y, self._x, meta, origin)

	def CachedFit(self, key: str, fit: Callable[[], ndarray]) -> ndarray:
		try:
			return self._fitCache[key]
		except KeyError:
			theta = fit()
			self._fitCache[key] = theta
			return theta

	def __len__(self) -> int:
		return self._y.size

	def __repr__(self) -> str:
		design = "" if self._x is None else f", p={self._x.Columns}"
		return f"Dataset(n={self._y.size}{design}, meta='{self._meta}')"


def _Vector(theta: Union[float, ndarray]) -> ndarray:
	return asarray(theta, dtype=float64).reshape(-1)


@export
def RequireDesign(data: Dataset) -> DesignMatrix:
	if data.X is None:
		raise ModelException(f"Regression model needs a dataset with a design matrix ({data!r}).")
	return data.X


@export
class ModelSpec(metaclass=ExtendedType, slots=True):
	"""Abstract parametric family: loss, minimizer and simulation."""

	_name: str

	def __init__(self, name: str) -> None:
		self._name = name

	@readonly
	def Name(self) -> str:
		return self._name

	@readonly
	def CacheKey(self) -> str:
		"""Key under which fits of this model are cached in a :class:`Dataset`."""
		return self._name

	@readonly
	def SupportsProfile(self) -> bool:
		return False

	@readonly
	def Notes(self) -> Tuple[str, ...]:
		"""Conventions worth reporting next to results computed with this model."""
		return ()

	@abstractmethod
	def ParameterDimension(self, data: Dataset) -> int:
		"""Length of the parameter vector for this data."""

	@abstractmethod
	def Loss(self, data: Dataset, theta: ndarray) -> float:
		"""Loss ``ℓ(data, θ)``."""

	@abstractmethod
	def Fit(self, data: Dataset, warmStart: Nullable[ndarray] = None) -> ndarray:
		"""Loss minimizer ``θ̂``."""

	@abstractmethod
	def Simulate(self, theta: ndarray, data: Dataset, rng: Union[RngStream, Generator]) -> Dataset:
		"""Draw a dataset of ``data.Size`` observations from ``P_θ`` (fixed design for regression families)."""

	def ProfileFit(self, data: Dataset, index: int, value: float, warmStart: Nullable[ndarray] = None) -> ndarray:
		"""Minimize the loss with component ``index`` pinned to ``value``."""
		raise UnsupportedProfileError(f"Model '{self._name}' does not support profile fits.")

	def CachedFit(self, data: Dataset) -> ndarray:
		return data.CachedFit(self.CacheKey, lambda: self.Fit(data))

	def __repr__(self) -> str:
		return f"{self.__class__.__name__}('{self.CacheKey}')"


@export
class GaussianMeanModel(ModelSpec):
	"""``N(θ, σ²)`` with known variance: ``ℓ = ½Σ(yᵢ − θ)²/σ²``."""

	_variance: float

	def __init__(self, knownVariance: float = 1.0) -> None:
		if knownVariance <= 0.0:
			raise ValueError(f"Variance must be positive, got {knownVariance}.")

		super().__init__("gaussian-mean")
		self._variance = knownVariance

	@readonly
	def Variance(self) -> float:
		return self._variance

	@readonly
	def CacheKey(self) -> str:
		return f"gaussian-mean(var={self._variance!r})"

	def ParameterDimension(self, data: Dataset) -> int:
		return 1

	def Loss(self, data: Dataset, theta: ndarray) -> float:
		residual = data.Y - float(_Vector(theta)[0])
		return 0.5 * float(residual @ residual) / self._variance

	def Fit(self, data: Dataset, warmStart: Nullable[ndarray] = None) -> ndarray:
		return array([float(data.Y.mean())])

	def Simulate(self, theta: ndarray, data: Dataset, rng: Union[RngStream, Generator]) -> Dataset:
		location = float(_Vector(theta)[0])
		y = location + self._variance ** 0.5 * AsGenerator(rng).standard_normal(data.Size)
		return data.WithResponse(y, origin=_Vector(theta))


@export
class LinearRegressionModel(ModelSpec):
	"""
	Gaussian linear regression ``Y = Xβ + σε``.

	With known ``σ`` the parameter is ``β`` and ``ℓ = ½‖y − Xβ‖²/σ²``. With unknown ``σ`` the parameter is ``(β, σ)``
	and the loss is the full negative log-likelihood ``(n/2)·log(2πσ²) + ‖y − Xβ‖²/(2σ²)``.
	"""

	_sigma: Nullable[float]

	def __init__(self, sigma: Nullable[float] = None) -> None:
		if sigma is not None and sigma <= 0.0:
			raise ValueError(f"Noise level must be positive, got {sigma}.")

		super().__init__("linear-regression")
		self._sigma = sigma

	@readonly
	def Sigma(self) -> Nullable[float]:
		"""Known noise level, or ``None`` if ``σ`` is part of the parameter."""
		return self._sigma

	@readonly
	def KnownSigma(self) -> bool:
		return self._sigma is not None

	@readonly
	def CacheKey(self) -> str:
		return f"linear-regression(sigma={self._sigma!r})"

	@readonly
	def SupportsProfile(self) -> bool:
		return True

	def ParameterDimension(self, data: Dataset) -> int:
		return RequireDesign(data).Columns + (0 if self.KnownSigma else 1)

	def Coefficients(self, theta: ndarray) -> ndarray:
		vector = _Vector(theta)
		return vector if self.KnownSigma else vector[:-1]

	def NoiseLevel(self, theta: ndarray) -> float:
		return self._sigma if self._sigma is not None else float(_Vector(theta)[-1])

	def Loss(self, data: Dataset, theta: ndarray) -> float:
		x = RequireDesign(data)
		residual = data.Y - x.Entries @ self.Coefficients(theta)
		rss = float(residual @ residual)
		if self._sigma is not None:
			return 0.5 * rss / (self._sigma * self._sigma)

		sigma = float(_Vector(theta)[-1])
		if sigma <= 0.0:
			return float("inf")
		return 0.5 * data.Size * log(2.0 * pi * sigma * sigma) + 0.5 * rss / (sigma * sigma)

	def _WithSigma(self, data: Dataset, beta: ndarray, x: DesignMatrix) -> ndarray:
		if self._sigma is not None:
			return beta

		residual = data.Y - x.Entries @ beta
		rss = float(residual @ residual)
		if rss == 0.0:
			raise DegenerateError(f"Maximum likelihood noise level is zero (perfect fit).")
		return insert(beta, beta.size, (rss / data.Size) ** 0.5)

	def Fit(self, data: Dataset, warmStart: Nullable[ndarray] = None) -> ndarray:
		x = RequireDesign(data)
		return self._WithSigma(data, LeastSquares(x, data.Y), x)

	def Simulate(self, theta: ndarray, data: Dataset, rng: Union[RngStream, Generator]) -> Dataset:
		x = RequireDesign(data)
		mean = x.Entries @ self.Coefficients(theta)
		y = mean + self.NoiseLevel(theta) * AsGenerator(rng).standard_normal(data.Size)
		return data.WithResponse(y, origin=_Vector(theta))

	def ProfileFit(self, data: Dataset, index: int, value: float, warmStart: Nullable[ndarray] = None) -> ndarray:
		x = RequireDesign(data)
		p = x.Columns
		if not self.KnownSigma and index == p:
			beta = LeastSquares(x, data.Y)
			return insert(beta, p, value)
		elif not (0 <= index < p):
			raise IndexError(f"Component index {index} out of range for {self.ParameterDimension(data)} parameters.")

		if p == 1:
			beta = array([float(value)])
		else:
			reduced = x.WithoutColumn(index)
			partial = LeastSquares(reduced, data.Y - x.Column(index) * value)
			beta = insert(partial, index, value)

		return self._WithSigma(data, beta, x)


@export
class LassoModel(ModelSpec):
	"""
	Lasso regression with loss ``½‖y − Xβ‖² + λΣ|βⱼ|``.

	The simulation variance ``σ²`` is a fixed constant (typically the Reid estimate of the observed data); it enters
	only :meth:`Simulate`, so the association function is the penalized objective the solver minimizes.
	"""

	_penalty:  float
	_variance: float

	def __init__(self, penalty: float, variance: float) -> None:
		if penalty < 0.0:
			raise ValueError(f"Lasso penalty must be non-negative, got {penalty}.")
		elif variance <= 0.0:
			raise ValueError(f"Simulation variance must be positive, got {variance}.")

		super().__init__("lasso")
		self._penalty = penalty
		self._variance = variance

	@readonly
	def Penalty(self) -> float:
		return self._penalty

	@readonly
	def Variance(self) -> float:
		return self._variance

	@readonly
	def CacheKey(self) -> str:
		return f"lasso(lambda={self._penalty!r})"

	@readonly
	def SupportsProfile(self) -> bool:
		return True

	def ParameterDimension(self, data: Dataset) -> int:
		return RequireDesign(data).Columns

	def Coefficients(self, theta: ndarray) -> ndarray:
		return _Vector(theta)

	def Loss(self, data: Dataset, theta: ndarray) -> float:
		beta = _Vector(theta)
		residual = data.Y - RequireDesign(data).Entries @ beta
		return 0.5 * float(residual @ residual) + self._penalty * float(np_abs(beta).sum())

	def Fit(self, data: Dataset, warmStart: Nullable[ndarray] = None) -> ndarray:
		start = warmStart if warmStart is not None else data.Origin
		return LassoFit(RequireDesign(data), data.Y, self._penalty, warmStart=start)

	def Simulate(self, theta: ndarray, data: Dataset, rng: Union[RngStream, Generator]) -> Dataset:
		x = RequireDesign(data)
		y = x.Entries @ _Vector(theta) + self._variance ** 0.5 * AsGenerator(rng).standard_normal(data.Size)
		return data.WithResponse(y, origin=_Vector(theta))

	def ProfileFit(self, data: Dataset, index: int, value: float, warmStart: Nullable[ndarray] = None) -> ndarray:
		x = RequireDesign(data)
		p = x.Columns
		if not (0 <= index < p):
			raise IndexError(f"Component index {index} out of range for {p} coefficients.")
		elif p == 1:
			return array([float(value)])

		start = None
		if warmStart is not None:
			start = _Vector(warmStart)[[j for j in range(p) if j != index]]

		# the pinned coordinate's penalty is a constant
		partial = LassoFit(x.WithoutColumn(index), data.Y - x.Column(index) * value, self._penalty, warmStart=start)
		return insert(partial, index, value)


@export
class SoftThresholdMeanModel(ModelSpec):
	"""
	Penalized normal mean with unit variance.

	``convention="loss"`` uses ``ℓ = ½Σ(yᵢ − θ)² + λ|θ|``; its minimizer thresholds the sample mean at ``λ/n``.
	``convention="verbatim"`` thresholds the sample mean at ``λ`` itself. To keep the fit the minimizer of the loss, this
	convention uses the penalty weight ``nλ``.
	"""

	_penalty:    float
	_convention: str

	def __init__(self, penalty: float, convention: str = "loss") -> None:
		if penalty < 0.0:
			raise ValueError(f"Penalty must be non-negative, got {penalty}.")
		elif convention not in ("loss", "verbatim"):
			raise ValueError(f"Unknown soft-threshold convention '{convention}'.")

		super().__init__("softthresh-mean")
		self._penalty = penalty
		self._convention = convention

	@readonly
	def Penalty(self) -> float:
		return self._penalty

	@readonly
	def Convention(self) -> str:
		return self._convention

	@readonly
	def CacheKey(self) -> str:
		return f"softthresh-mean(lambda={self._penalty!r}, {self._convention})"

	@readonly
	def Notes(self) -> Tuple[str, ...]:
		if self._convention == "verbatim":
			return (f"Soft-threshold mean uses the threshold lambda={self._penalty} on the sample mean (penalty weight n*lambda in the loss).", )
		return (f"Soft-threshold mean uses the loss minimizer (threshold lambda/n on the sample mean).", )

	def _Weight(self, n: int) -> float:
		return self._penalty * n if self._convention == "verbatim" else self._penalty

	def ParameterDimension(self, data: Dataset) -> int:
		return 1

	def Loss(self, data: Dataset, theta: ndarray) -> float:
		location = float(_Vector(theta)[0])
		residual = data.Y - location
		return 0.5 * float(residual @ residual) + self._Weight(data.Size) * abs(location)

	def Fit(self, data: Dataset, warmStart: Nullable[ndarray] = None) -> ndarray:
		n = data.Size
		mean = float(data.Y.mean())
		threshold = self._Weight(n) / n
		return array([float(sign(mean)) * max(abs(mean) - threshold, 0.0)])

	def Simulate(self, theta: ndarray, data: Dataset, rng: Union[RngStream, Generator]) -> Dataset:
		y = float(_Vector(theta)[0]) + AsGenerator(rng).standard_normal(data.Size)
		return data.WithResponse(y, origin=_Vector(theta))


@export
class VonMisesModel(ModelSpec):
	"""Von Mises location with known concentration: ``ℓ = −κΣcos(yᵢ − θ)``."""

	_kappa: float

	def __init__(self, kappa: float) -> None:
		if kappa <= 0.0:
			raise ValueError(f"Concentration must be positive, got {kappa}.")

		super().__init__("von-mises")
		self._kappa = kappa

	@readonly
	def Kappa(self) -> float:
		return self._kappa

	@readonly
	def CacheKey(self) -> str:
		return f"von-mises(kappa={self._kappa!r})"

	def ParameterDimension(self, data: Dataset) -> int:
		return 1

	def Loss(self, data: Dataset, theta: ndarray) -> float:
		return -self._kappa * float(cos(data.Y - float(_Vector(theta)[0])).sum())

	def Fit(self, data: Dataset, warmStart: Nullable[ndarray] = None) -> ndarray:
		sines = float(sin(data.Y).sum())
		cosines = float(cos(data.Y).sum())
		if hypot(sines, cosines) <= 1e-12 * data.Size:
			raise DegenerateError(f"Circular mean undefined: resultant length of {data.Size} angles is zero.")

		angle = atan2(sines, cosines) % (2.0 * pi)
		return array([0.0 if angle >= 2.0 * pi else angle])

	def Simulate(self, theta: ndarray, data: Dataset, rng: Union[RngStream, Generator]) -> Dataset:
		y = VonMisesSample(float(_Vector(theta)[0]), self._kappa, data.Size, rng)
		return data.WithResponse(y, origin=_Vector(theta))
