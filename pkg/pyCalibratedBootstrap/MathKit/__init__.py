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
Numerical substrate shared by all other subpackages.

It provides:

* reproducible, splittable random streams (:class:`RngStream`),
* normal and chi-square special functions,
* a design matrix abstraction with cached QR factorization and Gram matrix,
* least squares, soft thresholding and a coordinate-descent Lasso solver,
* the Reid variance estimator for Lasso fits,
* multivariate Student-t and von Mises samplers,
* an order preserving parallel map used to distribute replicates over workers.
"""
from concurrent.futures    import ThreadPoolExecutor, ProcessPoolExecutor
from math                  import exp, factorial, isfinite, log, sqrt
from sys                   import version_info
from typing                import Any, Callable, Iterable, List, Optional as Nullable, Sequence, Tuple, TypeVar, Union

from numpy                 import ndarray, integer as np_integer, asarray, abs as np_abs, arccos, cos, diag, empty, errstate, float64, log as np_log, mod, pi as np_pi, sign, sqrt as np_sqrt, zeros
from numpy.linalg          import qr
from numpy.random          import Generator, Philox, SeedSequence
from scipy.linalg          import solve_triangular
from scipy.special         import chdtr, chdtri, gammaln, ndtr, ndtri, xlogy

from pyTooling.Common      import getFullyQualifiedName
from pyTooling.Decorators  import export, readonly
from pyTooling.MetaClasses import ExtendedType

from pyCalibratedBootstrap import CalibratedBootstrapException


__all__ = ["MAX_UINT64", "PIVOT_TOLERANCE"]

MAX_UINT64 = 2**64 - 1        #: Largest admissible seed and derivation index.
PIVOT_TOLERANCE = 1e-12       #: Relative pivot size below which a triangular factor is rank deficient.

_Item = TypeVar("_Item")
_Result = TypeVar("_Result")


@export
class DomainError(CalibratedBootstrapException):
	"""Raised when an argument lies outside of a function's domain."""


@export
class RankDeficiencyError(CalibratedBootstrapException):
	"""Raised when a design matrix is not of full column rank."""


@export
class NonConvergenceError(CalibratedBootstrapException):
	"""Raised when an iterative solver exhausts its iteration budget."""


@export
class DegenerateError(CalibratedBootstrapException):
	"""Raised when an estimator would divide by zero or has no unique solution."""


@export
class RngStream(metaclass=ExtendedType, slots=True):
	"""
	Immutable descriptor of a random stream.

	A stream is identified by a seed and a derivation path. Child streams append one index to the path. Every draw is a
	pure function of ``(seed, path)``: a fresh :class:`numpy.random.Generator` backed by the counter-based
	:class:`~numpy.random.Philox` bit generator is created from a :class:`~numpy.random.SeedSequence`, which uses the
	path as spawn key. Distinct paths therefore hash to distinct Philox keys.
	"""

	_seed: int
	_path: Tuple[int, ...]

	def __init__(self, seed: int, path: Iterable[int] = ()) -> None:
		if not isinstance(seed, int) or isinstance(seed, bool):
			ex = TypeError(f"Parameter 'seed' is not of type 'int'.")
			if version_info >= (3, 11):  # pragma: no cover
				ex.add_note(f"Got type '{getFullyQualifiedName(seed)}'.")
			raise ex
		elif not (0 <= seed <= MAX_UINT64):
			raise ValueError(f"Parameter 'seed' ({seed}) is not a 64-bit unsigned integer.")

		self._seed = seed
		self._path = tuple(int(index) for index in path)
		for index in self._path:
			if not (0 <= index <= MAX_UINT64):
				raise ValueError(f"Derivation index {index} is not a 64-bit unsigned integer.")

	@readonly
	def Seed(self) -> int:
		return self._seed

	@readonly
	def Path(self) -> Tuple[int, ...]:
		return self._path

	def Child(self, index: int) -> "RngStream":
		"""Derive the child stream with the given index."""
		return RngStream(self._seed, self._path + (index, ))

	def Generator(self) -> Generator:
		"""Create a new generator positioned at the start of this stream."""
		return Generator(Philox(SeedSequence(self._seed, spawn_key=self._path)))

	def __eq__(self, other: Any) -> bool:
		if isinstance(other, RngStream):
			return self._seed == other._seed and self._path == other._path
		return NotImplemented

	def __hash__(self) -> int:
		return hash((self._seed, self._path))

	def __repr__(self) -> str:
		return f"RngStream(seed={self._seed}, path={self._path})"


@export
def AsGenerator(rng: Union[RngStream, Generator]) -> Generator:
	"""Accept either a stream descriptor or an already positioned generator."""
	if isinstance(rng, RngStream):
		return rng.Generator()
	elif isinstance(rng, Generator):
		return rng

	ex = TypeError(f"Parameter 'rng' is neither a 'RngStream' nor a 'numpy.random.Generator'.")
	if version_info >= (3, 11):  # pragma: no cover
		ex.add_note(f"Got type '{getFullyQualifiedName(rng)}'.")
	raise ex


@export
def ParallelMap(function: Callable[[_Item], _Result], items: Sequence[_Item], workers: int = 1, processes: bool = False) -> List[_Result]:
	"""
	Apply ``function`` to every item and return the results in item order.

	With ``workers <= 1`` the items are processed sequentially in the calling thread. Otherwise a thread pool (or a
	process pool, which requires a picklable module-level ``function``) is used. Because results are merged by item
	index, the outcome does not depend on the worker count.
	"""
	if workers <= 1 or len(items) <= 1:
		return [function(item) for item in items]

	executorClass = ProcessPoolExecutor if processes else ThreadPoolExecutor
	with executorClass(max_workers=workers) as executor:
		return list(executor.map(function, items))


# ---------------------------------------------------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------------------------------------------------
@export
def CheckDegreesOfFreedom(df: int) -> None:
	if not isinstance(df, (int, np_integer)) or isinstance(df, bool):
		ex = TypeError(f"Parameter 'df' is not of type 'int'.")
		if version_info >= (3, 11):  # pragma: no cover
			ex.add_note(f"Got type '{getFullyQualifiedName(df)}'.")
		raise ex
	elif df <= 0:
		raise DomainError(f"Degrees of freedom must be positive, got {df}.")


@export
def CheckProbability(p: float, name: str = "p") -> None:
	if not (0.0 < p < 1.0):
		raise DomainError(f"Parameter '{name}' must be in the open interval (0, 1), got {p}.")


@export
def NormalCDF(x: float) -> float:
	"""Standard normal distribution function Φ(x)."""
	if not isfinite(x):
		raise DomainError(f"Parameter 'x' must be finite, got {x}.")

	return float(ndtr(x))


@export
def NormalQuantile(p: float) -> float:
	"""Inverse of :func:`NormalCDF`."""
	CheckProbability(p)
	return float(ndtri(p))


@export
def ChiSquareCDF(x: float, df: int) -> float:
	CheckDegreesOfFreedom(df)
	if x < 0.0:
		raise DomainError(f"Parameter 'x' must be non-negative, got {x}.")

	return float(chdtr(df, x))


@export
def ChiSquareQuantile(p: float, df: int) -> float:
	"""Return ``x`` with ``ChiSquareCDF(x, df) = p``."""
	CheckDegreesOfFreedom(df)
	CheckProbability(p)

	return float(chdtri(df, 1.0 - p))


@export
def ChiSquareDensity(x: float, df: int) -> float:
	CheckDegreesOfFreedom(df)
	if x < 0.0:
		return 0.0
	elif x == 0.0:
		return 0.5 if df == 2 else (float("inf") if df == 1 else 0.0)

	halfDf = 0.5 * df
	logDensity = float(xlogy(halfDf - 1.0, x)) - 0.5 * x - halfDf * log(2.0) - float(gammaln(halfDf))
	return exp(logDensity)


@export
def BesselI(order: int, kappa: float, terms: int = 50) -> float:
	"""Modified Bessel function of the first kind by its power series, truncated after ``terms`` terms."""
	if order < 0:
		raise DomainError(f"Bessel order must be non-negative, got {order}.")

	half = 0.5 * kappa
	total = 0.0
	for k in range(terms):
		total += half ** (2 * k + order) / (factorial(k) * factorial(k + order))

	return total


@export
def BesselRatio(kappa: float, terms: int = 50) -> float:
	"""Mean resultant length I₁(κ)/I₀(κ) of a von Mises distribution."""
	if kappa <= 0.0:
		raise DomainError(f"Concentration must be positive, got {kappa}.")

	return BesselI(1, kappa, terms) / BesselI(0, kappa, terms)


# ---------------------------------------------------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------------------------------------------------
@export
class DesignMatrix(metaclass=ExtendedType, slots=True):
	"""
	An ``n × p`` matrix of regressors.

	The matrix is immutable. Its Gram matrix, its Householder QR factorization and the designs with one column removed
	are computed on first use and cached, so replicates sharing the design (fixed-design simulation) reuse them.
	"""

	_entries:      ndarray
	_standardized: bool
	_ddof:         Nullable[int]
	_columnNames:  Tuple[str, ...]
	_gram:         Nullable[ndarray]
	_qr:           Nullable[Tuple[ndarray, ndarray]]
	_reduced:      dict

	def __init__(self, entries: Any, standardized: bool = False, ddof: Nullable[int] = None, columnNames: Nullable[Iterable[str]] = None) -> None:
		matrix = asarray(entries, dtype=float64)
		if matrix.ndim != 2:
			raise ValueError(f"A design matrix needs two dimensions, got {matrix.ndim}.")
		elif not bool((abs(matrix) < float("inf")).all()):
			raise DomainError(f"Design matrix contains non-finite entries.")

		matrix = matrix.copy()
		matrix.setflags(write=False)

		self._entries = matrix
		self._standardized = standardized
		self._ddof = ddof
		if columnNames is None:
			self._columnNames = tuple(f"x{j + 1}" for j in range(matrix.shape[1]))
		else:
			self._columnNames = tuple(columnNames)
			if len(self._columnNames) != matrix.shape[1]:
				raise ValueError(f"Got {len(self._columnNames)} column names for {matrix.shape[1]} columns.")

		self._gram = None
		self._qr = None
		self._reduced = {}

	@readonly
	def Rows(self) -> int:
		return self._entries.shape[0]

	@readonly
	def Columns(self) -> int:
		return self._entries.shape[1]

	@readonly
	def Entries(self) -> ndarray:
		return self._entries

	@readonly
	def Standardized(self) -> bool:
		return self._standardized

	@readonly
	def DegreesOfFreedomCorrection(self) -> Nullable[int]:
		"""``1`` for sample standard deviation scaling, ``0`` for ``(1/n)Σx² = 1`` scaling, ``None`` if raw."""
		return self._ddof

	@readonly
	def ColumnNames(self) -> Tuple[str, ...]:
		return self._columnNames

	@readonly
	def Gram(self) -> ndarray:
		if self._gram is None:
			gram = self._entries.T @ self._entries
			gram.setflags(write=False)
			self._gram = gram

		return self._gram

	@readonly
	def QR(self) -> Tuple[ndarray, ndarray]:
		"""
		Reduced Householder QR factorization.

		:raises RankDeficiencyError: If a diagonal element of ``R`` is below :data:`PIVOT_TOLERANCE` relative to the
		                             largest one.
		"""
		if self._qr is None:
			n, p = self._entries.shape
			if n < p:
				raise RankDeficiencyError(f"Design with {n} rows cannot have full column rank {p}.")

			q, r = qr(self._entries, mode="reduced")
			pivots = np_abs(diag(r))
			largest = float(pivots.max()) if p > 0 else 0.0
			if p > 0 and (largest == 0.0 or float(pivots.min()) < PIVOT_TOLERANCE * largest):
				ex = RankDeficiencyError(f"Design matrix ({n}×{p}) is rank deficient.")
				ex.add_note(f"Smallest relative pivot: {float(pivots.min()) / largest if largest > 0.0 else 0.0:.3e}")
				raise ex

			self._qr = (q, r)

		return self._qr

	def Column(self, index: int) -> ndarray:
		return self._entries[:, index]

	def Take(self, rows: ndarray) -> "DesignMatrix":
		"""Select rows (with repetitions) into a new design."""
		return DesignMatrix(self._entries[rows], standardized=False, columnNames=self._columnNames)

	def WithoutColumn(self, index: int) -> "DesignMatrix":
		"""Design without column ``index``; cached per index."""
		try:
			return self._reduced[index]
		except KeyError:
			keep = [j for j in range(self.Columns) if j != index]
			reduced = DesignMatrix(self._entries[:, keep], columnNames=(self._columnNames[j] for j in keep))
			self._reduced[index] = reduced
			return reduced

	def Standardize(self, ddof: int = 1) -> "DesignMatrix":
		"""
		Center every column to mean 0 and scale it.

		With ``ddof=1`` the sample standard deviation of every column becomes 1; with ``ddof=0`` the mean of squares
		becomes 1.

		:raises DegenerateError: If a column is constant.
		"""
		if ddof not in (0, 1):
			raise ValueError(f"Parameter 'ddof' must be 0 or 1, got {ddof}.")

		centered = self._entries - self._entries.mean(axis=0)
		scale = centered.std(axis=0, ddof=ddof)
		if bool((scale == 0.0).any()):
			constant = [self._columnNames[j] for j in range(self.Columns) if scale[j] == 0.0]
			raise DegenerateError(f"Cannot standardize constant column(s): {', '.join(constant)}.")

		return DesignMatrix(centered / scale, standardized=True, ddof=ddof, columnNames=self._columnNames)

	def __repr__(self) -> str:
		return f"DesignMatrix({self.Rows}×{self.Columns}, standardized={self._standardized})"


@export
def LeastSquares(x: DesignMatrix, y: ndarray) -> ndarray:
	"""
	Minimize ``‖y − Xβ‖²`` by Householder QR.

	:raises RankDeficiencyError: If ``X`` is not of full column rank.
	"""
	response = asarray(y, dtype=float64)
	if response.shape != (x.Rows, ):
		raise ValueError(f"Response length {response.shape} does not match {x.Rows} design rows.")

	q, r = x.QR
	return solve_triangular(r, q.T @ response, lower=False)


@export
def SoftThreshold(z: float, gamma: float) -> float:
	"""``sign(z)·(|z| − γ)₊``"""
	if gamma < 0.0:
		raise DomainError(f"Threshold must be non-negative, got {gamma}.")

	if z > gamma:
		return z - gamma
	elif z < -gamma:
		return z + gamma
	return 0.0


def _LassoObjective(beta: ndarray, gram: ndarray, xty: ndarray, yty: float, penalty: float) -> float:
	return 0.5 * (yty - 2.0 * float(beta @ xty) + float(beta @ gram @ beta)) + penalty * float(np_abs(beta).sum())


@export
def LassoFit(
	x: DesignMatrix,
	y: ndarray,
	penalty: float,
	warmStart: Nullable[ndarray] = None,
	maxSweeps: int = 10_000,
	tolerance: float = 1e-10,
	objectiveTrace: Nullable[List[float]] = None
) -> ndarray:
	"""
	Minimize ``½‖y − Xβ‖² + λ·Σ|βⱼ|`` by cyclic coordinate descent on the Gram matrix.

	Iteration stops when the relative objective change of a sweep drops below ``tolerance`` and the largest change of
	any gradient component caused by the sweep is below ``1e-9·max(λ, 1)``. The second condition keeps the KKT
	residuals well inside ``1e-6·λ``. If ``objectiveTrace`` is given, the objective after every sweep is appended.

	:raises NonConvergenceError: If the relative objective change still exceeds ``tolerance`` after ``maxSweeps``.
	"""
	if penalty < 0.0:
		raise DomainError(f"Lasso penalty must be non-negative, got {penalty}.")

	response = asarray(y, dtype=float64)
	if response.shape != (x.Rows, ):
		raise ValueError(f"Response length {response.shape} does not match {x.Rows} design rows.")

	gram = x.Gram
	xty = x.Entries.T @ response
	yty = float(response @ response)
	diagonal = diag(gram)
	p = x.Columns

	beta = zeros(p) if warmStart is None else asarray(warmStart, dtype=float64)[:p].copy()
	gradient = xty - gram @ beta
	driftTolerance = 1e-9 * max(penalty, 1.0)
	absGram = np_abs(gram)

	previous = _LassoObjective(beta, gram, xty, yty, penalty)
	change = float("inf")
	for _ in range(maxSweeps):
		delta = zeros(p)
		for j in range(p):
			if diagonal[j] == 0.0:
				continue

			old = beta[j]
			new = SoftThreshold(float(gradient[j] + diagonal[j] * old), penalty) / diagonal[j]
			if new != old:
				step = new - old
				beta[j] = new
				gradient -= gram[:, j] * step
				delta[j] = step

		current = _LassoObjective(beta, gram, xty, yty, penalty)
		if objectiveTrace is not None:
			objectiveTrace.append(current)

		change = abs(previous - current) / max(abs(current), 1e-300)
		drift = float((absGram @ np_abs(delta)).max()) if p > 0 else 0.0
		previous = current
		if change <= tolerance and drift <= driftTolerance:
			return beta
		elif drift == 0.0:
			return beta

	if change <= tolerance:
		return beta

	ex = NonConvergenceError(f"Lasso coordinate descent did not converge within {maxSweeps} sweeps.")
	ex.add_note(f"Last relative objective change: {change:.3e} (tolerance {tolerance:.1e}).")
	raise ex


@export
def ReidSigma2(x: DesignMatrix, y: ndarray, beta: ndarray) -> float:
	"""
	Residual variance ``RSS/(n − s)`` of a Lasso fit, ``s`` counting the non-zero coefficients.

	:raises DegenerateError: If ``n ≤ s``.
	"""
	coefficients = asarray(beta, dtype=float64)
	n = x.Rows
	s = int((coefficients != 0.0).sum())
	if n <= s:
		raise DegenerateError(f"Residual variance undefined with n = {n} observations and s = {s} active coefficients.")

	residual = asarray(y, dtype=float64) - x.Entries @ coefficients
	return float(residual @ residual) / (n - s)


# ---------------------------------------------------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------------------------------------------------
@export
def StudentTVectorSample(dim: int, df: int, rng: Union[RngStream, Generator], size: Nullable[int] = None) -> ndarray:
	"""
	Draw from the multivariate Student-t distribution ``t_dim(0, I, df)``.

	Every vector is ``g/√(w/df)`` with a standard normal vector ``g`` and one chi-square draw ``w`` shared by all
	components of that vector. Returns shape ``(dim, )`` or ``(size, dim)``.
	"""
	if df < 1:
		raise DomainError(f"Degrees of freedom must be at least 1, got {df}.")

	generator = AsGenerator(rng)
	count = 1 if size is None else size
	normal = generator.standard_normal((count, dim))
	shared = generator.chisquare(df, size=(count, 1))
	sample = normal / np_sqrt(shared / df)

	return sample[0] if size is None else sample


def _WrapAngle(angles: ndarray) -> ndarray:
	wrapped = mod(angles, 2.0 * np_pi)
	wrapped[wrapped >= 2.0 * np_pi] = 0.0
	return wrapped


@export
def VonMisesSample(theta: float, kappa: float, size: int, rng: Union[RngStream, Generator]) -> ndarray:
	"""
	Von Mises draws on ``[0, 2π)`` by the Best-Fisher rejection sampler with a wrapped Cauchy envelope.
	"""
	if kappa <= 0.0:
		raise DomainError(f"Concentration must be positive, got {kappa}.")

	generator = AsGenerator(rng)
	tau = 1.0 + sqrt(1.0 + 4.0 * kappa * kappa)
	rho = (tau - sqrt(2.0 * tau)) / (2.0 * kappa)
	r = (1.0 + rho * rho) / (2.0 * rho)

	result = empty(size)
	filled = 0
	while filled < size:
		batch = max(2 * (size - filled), 16)
		u1, u2, u3 = generator.random((3, batch))
		z = cos(np_pi * u1)
		f = (1.0 + r * z) / (r + z)
		c = kappa * (r - f)
		# u2 == 0 accepts through the logarithmic test
		with errstate(divide="ignore"):
			accept = (c * (2.0 - c) - u2 > 0.0) | (np_log(c / u2) + 1.0 - c >= 0.0)

		angles = sign(u3[accept] - 0.5) * arccos(f[accept])
		take = min(angles.size, size - filled)
		result[filled:filled + take] = angles[:take]
		filled += take

	return _WrapAngle(result + theta)

