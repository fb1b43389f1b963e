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
Scenario definitions, configuration and coverage bookkeeping.

A :class:`ScenarioConfig` is resolved in three layers: the scenario's built-in defaults, an optional flat YAML file and
command line overrides. The resolved configuration (without worker count and output directory) is part of every
report, together with its digest.
"""
from enum                          import Enum
from hashlib                       import sha256
from json                          import dumps
from math                          import sqrt
from os                            import environ
from pathlib                       import Path
from typing                        import Any, Dict, Iterable, Iterator, List, Mapping, Optional as Nullable, Tuple, Union

from ruamel.yaml                   import YAML, CommentedMap

from pyTooling.Decorators          import export, readonly
from pyTooling.MetaClasses         import ExtendedType

from pyCalibratedBootstrap         import CalibratedBootstrapException
from pyCalibratedBootstrap.MathKit import MAX_UINT64
from pyCalibratedBootstrap.Calibrate import RaConfig, CalibrationException


__all__ = ["THREADS_VARIABLE", "KNOWN_KEYS", "REPORT_SCHEMA_VERSION"]

THREADS_VARIABLE = "CB_THREADS"   #: Environment variable consulted when no worker count is given.
REPORT_SCHEMA_VERSION = 1         #: Version of the ``report.json`` layout.


@export
class HarnessException(CalibratedBootstrapException):
	"""Base-class for scenario, configuration and data errors."""


@export
class ConfigurationError(HarnessException):
	"""Raised for unknown keys, malformed values or inconsistent settings."""


@export
class DataParseError(HarnessException):
	"""Raised when an input data file can't be parsed; the location is attached as a note."""


@export
class Scenario(Enum):
	"""Experiments runnable by ``cb run``."""
	MeanSimple =     "mean-simple"
	SoftThreshMean = "softthresh-mean"
	LRJoint =        "lr-joint"
	LRMarginal =     "lr-marginal"
	LassoSim =       "lasso-sim"
	LassoDiabetes =  "lasso-diabetes"
	VonMisesDR =     "vonmises-dr"

	__MAPPINGS__ = {
		"mean-simple":     "mean-simple",
		"mean_simple":     "mean-simple",
		"softthresh-mean": "softthresh-mean",
		"softthresh_mean": "softthresh-mean",
		"lr-joint":        "lr-joint",
		"lr_joint":        "lr-joint",
		"lr-marginal":     "lr-marginal",
		"lr_marginal":     "lr-marginal",
		"lasso-sim":       "lasso-sim",
		"lasso_sim":       "lasso-sim",
		"lasso-diabetes":  "lasso-diabetes",
		"lasso_diabetes":  "lasso-diabetes",
		"vonmises-dr":     "vonmises-dr",
		"vonmises_dr":     "vonmises-dr"
	}

	@classmethod
	def Parse(cls, name: str) -> "Scenario":
		try:
			return cls(cls.__MAPPINGS__[name.lower()])
		except KeyError as ex:
			newEx = ConfigurationError(f"Unknown scenario '{name}'.")
			newEx.add_note(f"Known scenarios: {', '.join(member.value for member in cls)}")
			raise newEx from ex

	@readonly
	def IsRegression(self) -> bool:
		return self in (Scenario.LRJoint, Scenario.LRMarginal, Scenario.LassoSim)

	def __str__(self) -> str:
		return self.value


KNOWN_KEYS = (
	"scenario", "seed", "n", "p", "kappa", "sigma", "lambda", "alpha", "alpha_set", "reps", "threads", "out", "full_scale",
	"B", "d", "T", "M_l", "M_u", "m0", "pool_size", "grid_size", "n_mc", "data", "convention", "emit_contour_histogram"
)

_COMMON_DEFAULTS: Dict[str, Any] = {
	"seed": None, "n": None, "p": None, "kappa": None, "sigma": 1.0, "lambda": None, "alpha": [0.05], "alpha_set": None,
	"reps": 1, "threads": None, "out": "results", "full_scale": False, "B": 10, "d": 10.0, "T": 100, "M_l": None,
	"M_u": None, "m0": None, "pool_size": 1000, "grid_size": 512, "n_mc": 100, "data": None, "convention": None,
	"emit_contour_histogram": False
}

_LR_ALPHAS = [0.05, 0.15, 0.25, 0.35, 0.45, 0.55, 0.65, 0.75, 0.85, 0.95]
_SOFT_ALPHAS = [round(0.05 * k, 2) for k in range(1, 20)]

_SCENARIO_DEFAULTS: Dict[Scenario, Dict[str, Any]] = {
	Scenario.MeanSimple:     {"n": 50, "alpha": [0.05]},
	Scenario.SoftThreshMean: {"n": 100, "lambda": 0.2, "alpha": [0.05], "alpha_set": _SOFT_ALPHAS, "convention": "verbatim"},
	Scenario.LRJoint:        {"n": 200, "kappa": 0.3, "alpha": _LR_ALPHAS, "alpha_set": _LR_ALPHAS, "B": 100},
	Scenario.LRMarginal:     {"n": 200, "kappa": 0.3, "alpha": _LR_ALPHAS, "alpha_set": _LR_ALPHAS, "B": 100},
	Scenario.LassoSim:       {"n": 100, "p": 30, "lambda": 20.1, "alpha": [0.05, 0.15, 0.25], "alpha_set": [0.1, 0.5, 0.9], "reps": 200, "pool_size": 200},
	Scenario.LassoDiabetes:  {"lambda": 520.0, "alpha": [0.05], "alpha_set": [0.1, 0.5, 0.9], "pool_size": 1000},
	Scenario.VonMisesDR:     {"kappa": 2.0, "grid_size": 512, "n_mc": 100, "pool_size": 5000}
}

#: Published (n, p, λ) settings of the simulated Lasso study, run with ``full_scale``.
LASSO_FULL_SCALE: Tuple[Tuple[int, int, float], ...] = ((100, 30, 20.1), (200, 100, 40.2), (500, 450, 63.1))
LASSO_FULL_SCALE_REPS = 500

#: Keys that do not influence results and are therefore excluded from the report and its digest.
_VOLATILE_KEYS = ("threads", "out")


def _ParseFloat(key: str, value: Any) -> float:
	try:
		return float(value)
	except (TypeError, ValueError) as ex:
		raise ConfigurationError(f"Value '{value}' of key '{key}' is not a number.") from ex


def _ParseInt(key: str, value: Any, minimum: Nullable[int] = None) -> int:
	if isinstance(value, bool):
		raise ConfigurationError(f"Value '{value}' of key '{key}' is not an integer.")
	try:
		number = int(value)
	except (TypeError, ValueError) as ex:
		raise ConfigurationError(f"Value '{value}' of key '{key}' is not an integer.") from ex

	if isinstance(value, float) and number != value:
		raise ConfigurationError(f"Value '{value}' of key '{key}' is not an integer.")
	elif minimum is not None and number < minimum:
		raise ConfigurationError(f"Value {number} of key '{key}' must be at least {minimum}.")
	return number


def _ParseBool(key: str, value: Any) -> bool:
	if isinstance(value, bool):
		return value
	elif isinstance(value, str) and value.lower() in ("true", "yes", "on", "1"):
		return True
	elif isinstance(value, str) and value.lower() in ("false", "no", "off", "0"):
		return False
	raise ConfigurationError(f"Value '{value}' of key '{key}' is not a boolean.")


def _ParseProbabilities(key: str, value: Any) -> List[float]:
	if isinstance(value, str):
		items: Iterable[Any] = [item for item in value.replace(";", ",").split(",") if item.strip() != ""]
	elif isinstance(value, (list, tuple)):
		items = value
	else:
		items = [value]

	probabilities = [_ParseFloat(key, item) for item in items]
	if len(probabilities) == 0:
		raise ConfigurationError(f"Key '{key}' needs at least one significance level.")
	for probability in probabilities:
		if not (0.0 < probability < 1.0):
			raise ConfigurationError(f"Significance level {probability} of key '{key}' is outside of (0, 1).")
	return probabilities


@export
def LoadConfigFile(path: Path) -> Dict[str, Any]:
	"""Read a flat key/value YAML configuration file."""
	if not path.exists():
		raise ConfigurationError(f"Configuration file '{path}' does not exist.") from FileNotFoundError(f"File '{path}' not found.")

	try:
		yamlReader = YAML()
		document = yamlReader.load(path)
	except Exception as ex:
		raise ConfigurationError(f"Couldn't read configuration file '{path}'.") from ex

	if document is None:
		return {}
	elif not isinstance(document, (CommentedMap, dict)):
		ex = ConfigurationError(f"Configuration file '{path}' is not a flat key/value document.")
		ex.add_note(f"Got a top-level '{type(document).__name__}'.")
		raise ex

	values: Dict[str, Any] = {}
	for key, value in document.items():
		if isinstance(value, (CommentedMap, dict)):
			raise ConfigurationError(f"Key '{key}' in '{path}' holds a nested mapping; configuration files are flat.")
		values[str(key)] = list(value) if isinstance(value, list) else value
	return values


@export
class ScenarioConfig(metaclass=ExtendedType, slots=True):
	"""Fully resolved settings of one scenario run."""

	_scenario: Scenario
	_values:   Dict[str, Any]

	def __init__(self, scenario: Union[Scenario, str], values: Nullable[Mapping[str, Any]] = None) -> None:
		self._scenario = scenario if isinstance(scenario, Scenario) else Scenario.Parse(scenario)
		self._values = self._Normalize(dict(values) if values is not None else self.Defaults(self._scenario))

	@classmethod
	def Defaults(cls, scenario: Scenario) -> Dict[str, Any]:
		values = dict(_COMMON_DEFAULTS)
		values.update(_SCENARIO_DEFAULTS[scenario])
		return values

	@classmethod
	def Resolve(
		cls,
		scenario: Union[Scenario, str, None],
		configFile: Nullable[Path] = None,
		overrides: Nullable[Mapping[str, Any]] = None,
		environment: Nullable[Mapping[str, str]] = None
	) -> "ScenarioConfig":
		"""
		Layer built-in defaults, an optional configuration file and overrides (``None`` values are ignored).

		:raises ConfigurationError: For unknown keys, malformed or inconsistent values and a missing seed.
		"""
		layers: List[Dict[str, Any]] = []
		if configFile is not None:
			layers.append(LoadConfigFile(configFile))
		if overrides is not None:
			layers.append({key: value for key, value in overrides.items() if value is not None})

		for layer in layers:
			unknown = [key for key in layer if key not in KNOWN_KEYS]
			if len(unknown) > 0:
				ex = ConfigurationError(f"Unknown configuration key(s): {', '.join(unknown)}.")
				ex.add_note(f"Known keys: {', '.join(KNOWN_KEYS)}")
				raise ex

		name = scenario
		for layer in layers:
			if "scenario" in layer:
				if name is not None and Scenario.Parse(str(layer["scenario"])) is not (name if isinstance(name, Scenario) else Scenario.Parse(name)):
					raise ConfigurationError(f"Scenario '{layer['scenario']}' in the configuration conflicts with '{name}'.")
				name = layer["scenario"]
		if name is None:
			raise ConfigurationError(f"No scenario given.")

		resolvedScenario = name if isinstance(name, Scenario) else Scenario.Parse(str(name))
		values = cls.Defaults(resolvedScenario)
		explicit: Dict[str, Any] = {}
		for layer in layers:
			explicit.update(layer)
		explicit.pop("scenario", None)

		# an explicit p replaces a default kappa and vice versa
		if resolvedScenario.IsRegression:
			if "p" in explicit and "kappa" in explicit:
				ex = ConfigurationError(f"Both 'p' and 'kappa' are given.")
				ex.add_note(f"Regression scenarios take exactly one of them.")
				raise ex
			elif "p" in explicit:
				values["kappa"] = None
			elif "kappa" in explicit:
				values["p"] = None
		values.update(explicit)

		if values.get("threads") is None:
			env = environ if environment is None else environment
			if THREADS_VARIABLE in env:
				values["threads"] = env[THREADS_VARIABLE]

		if values.get("seed") is None:
			ex = ConfigurationError(f"Scenario '{resolvedScenario}' needs a seed.")
			ex.add_note(f"Pass '--seed N' or set 'seed:' in the configuration file.")
			raise ex

		return cls(resolvedScenario, values)

	def _Normalize(self, raw: Dict[str, Any]) -> Dict[str, Any]:
		values = dict(_COMMON_DEFAULTS)
		values.update(raw)

		if values["seed"] is not None:
			values["seed"] = _ParseInt("seed", values["seed"], 0)
			if values["seed"] > MAX_UINT64:
				raise ConfigurationError(f"Seed {values['seed']} exceeds the 64-bit range.")

		for key in ("n", "p", "M_l", "M_u"):
			if values[key] is not None:
				values[key] = _ParseInt(key, values[key], 1)
		for key in ("reps", "B", "T", "pool_size", "grid_size", "n_mc"):
			values[key] = _ParseInt(key, values[key], 1)
		values["threads"] = 1 if values["threads"] is None else _ParseInt("threads", values["threads"], 1)

		for key in ("kappa", "m0"):
			if values[key] is not None:
				values[key] = _ParseFloat(key, values[key])
				if values[key] <= 0.0:
					raise ConfigurationError(f"Value of key '{key}' must be positive.")
		values["d"] = _ParseFloat("d", values["d"])

		sigma = values["sigma"]
		if isinstance(sigma, str) and sigma.lower() == "unknown":
			values["sigma"] = "unknown"
		else:
			values["sigma"] = _ParseFloat("sigma", sigma)
			if values["sigma"] <= 0.0:
				raise ConfigurationError(f"Noise level 'sigma' must be positive or 'unknown'.")

		penalty = values["lambda"]
		if isinstance(penalty, str) and penalty.lower() == "cv":
			values["lambda"] = "cv"
		elif penalty is not None:
			values["lambda"] = _ParseFloat("lambda", penalty)
			if values["lambda"] < 0.0:
				raise ConfigurationError(f"Penalty 'lambda' must be non-negative or 'cv'.")

		values["alpha"] = _ParseProbabilities("alpha", values["alpha"])
		if values["alpha_set"] is not None:
			values["alpha_set"] = _ParseProbabilities("alpha_set", values["alpha_set"])

		values["full_scale"] = _ParseBool("full_scale", values["full_scale"])
		values["emit_contour_histogram"] = _ParseBool("emit_contour_histogram", values["emit_contour_histogram"])

		if values["convention"] is not None and values["convention"] not in ("loss", "verbatim"):
			raise ConfigurationError(f"Convention '{values['convention']}' is neither 'loss' nor 'verbatim'.")

		if values["out"] is not None:
			values["out"] = str(values["out"])
		if values["data"] is not None:
			values["data"] = str(values["data"])

		if self._scenario.IsRegression and values["p"] is None and values["kappa"] is None:
			raise ConfigurationError(f"Regression scenario '{self._scenario}' needs 'p' or 'kappa'.")
		elif self._scenario is Scenario.LassoDiabetes and values["data"] is None:
			ex = ConfigurationError(f"Scenario 'lasso-diabetes' needs an input CSV ('--data FILE').")
			ex.add_note(f"'cb export-diabetes --out FILE' writes one from scikit-learn's bundled copy.")
			raise ex

		return values

	@readonly
	def Scenario(self) -> Scenario:
		return self._scenario

	def __getitem__(self, key: str) -> Any:
		return self._values[key]

	@readonly
	def Seed(self) -> int:
		return self._values["seed"]

	@readonly
	def N(self) -> Nullable[int]:
		return self._values["n"]

	@readonly
	def P(self) -> Nullable[int]:
		"""Number of regressors, derived as ``round(κ·n)`` when only ``kappa`` is given."""
		if self._values["p"] is not None:
			return self._values["p"]
		elif self._values["kappa"] is not None and self._values["n"] is not None:
			return max(int(round(self._values["kappa"] * self._values["n"])), 1)
		return None

	@readonly
	def Kappa(self) -> Nullable[float]:
		return self._values["kappa"]

	@readonly
	def Sigma(self) -> Nullable[float]:
		"""Known noise level, ``None`` for ``sigma: unknown``."""
		return None if self._values["sigma"] == "unknown" else self._values["sigma"]

	@readonly
	def Lambda(self) -> Union[float, str, None]:
		return self._values["lambda"]

	@readonly
	def Alphas(self) -> List[float]:
		return self._values["alpha"]

	@readonly
	def AlphaSet(self) -> List[float]:
		return self._values["alpha_set"] if self._values["alpha_set"] is not None else self._values["alpha"]

	@readonly
	def Reps(self) -> int:
		return self._values["reps"]

	@readonly
	def Threads(self) -> int:
		return self._values["threads"]

	@readonly
	def OutputDirectory(self) -> Path:
		return Path(self._values["out"])

	@readonly
	def FullScale(self) -> bool:
		return self._values["full_scale"]

	@readonly
	def PoolSize(self) -> int:
		return self._values["pool_size"]

	@readonly
	def GridSize(self) -> int:
		return self._values["grid_size"]

	@readonly
	def NMC(self) -> int:
		return self._values["n_mc"]

	@readonly
	def DataFile(self) -> Nullable[Path]:
		return None if self._values["data"] is None else Path(self._values["data"])

	@readonly
	def Convention(self) -> str:
		return self._values["convention"] if self._values["convention"] is not None else "loss"

	@readonly
	def EmitContourHistogram(self) -> bool:
		return self._values["emit_contour_histogram"]

	def RaConfig(self, alpha: float) -> RaConfig:
		"""Calibration settings for level ``alpha``; data dependent defaults stay open."""
		v = self._values
		try:
			return RaConfig(alpha, v["B"], v["d"], v["T"], v["M_l"], v["M_u"], v["m0"])
		except CalibrationException as ex:
			raise ConfigurationError(f"Invalid calibration settings: {ex}") from ex

	def ToDict(self) -> Dict[str, Any]:
		"""Resolved values that influence results, with the scenario name first."""
		result: Dict[str, Any] = {"scenario": self._scenario.value}
		for key in KNOWN_KEYS:
			if key in ("scenario", ) + _VOLATILE_KEYS:
				continue
			result[key] = self._values[key]
		result["p"] = self.P
		return result

	@readonly
	def Digest(self) -> str:
		"""SHA-256 of the canonical JSON form of :meth:`ToDict`."""
		canonical = dumps(self.ToDict(), sort_keys=True, separators=(",", ":"))
		return sha256(canonical.encode("utf-8")).hexdigest()

	def __repr__(self) -> str:
		return f"ScenarioConfig({self._scenario}, seed={self._values['seed']})"


@export
class CoverageRow(metaclass=ExtendedType, slots=True):
	_setting:     str
	_alpha:       float
	_method:      str
	_metric:      str
	_hits:        int
	_count:       int
	_magnitudes:  List[float]

	def __init__(self, setting: str, alpha: float, method: str, metric: str) -> None:
		self._setting = setting
		self._alpha = alpha
		self._method = method
		self._metric = metric
		self._hits = 0
		self._count = 0
		self._magnitudes = []

	@readonly
	def Key(self) -> Tuple[str, float, str, str]:
		return self._setting, self._alpha, self._method, self._metric

	@readonly
	def Reps(self) -> int:
		return self._count

	@readonly
	def Coverage(self) -> float:
		return self._hits / self._count if self._count > 0 else 0.0

	@readonly
	def CoverageSE(self) -> float:
		"""Binomial standard error ``√(c(1 − c)/R)``."""
		if self._count == 0:
			return 0.0
		coverage = self.Coverage
		return sqrt(coverage * (1.0 - coverage) / self._count)

	@readonly
	def Magnitude(self) -> float:
		return sum(self._magnitudes) / len(self._magnitudes) if len(self._magnitudes) > 0 else 0.0

	@readonly
	def MagnitudeSE(self) -> float:
		count = len(self._magnitudes)
		if count < 2:
			return 0.0
		mean = self.Magnitude
		return sqrt(sum((m - mean) ** 2 for m in self._magnitudes) / (count - 1) / count)

	def Add(self, covered: bool, magnitude: float) -> None:
		self._count += 1
		self._hits += 1 if covered else 0
		self._magnitudes.append(float(magnitude))

	def ToRow(self) -> Tuple[str, float, str, str, float, float, float, float, int]:
		return (self._setting, self._alpha, self._method, self._metric, self.Coverage, self.CoverageSE, self.Magnitude, self.MagnitudeSE, self._count)


@export
class CoverageTable(metaclass=ExtendedType, slots=True):
	"""Coverage estimates keyed by ``(setting, alpha, method, metric)``, in insertion order."""

	_rows: Dict[Tuple[str, float, str, str], CoverageRow]

	def __init__(self) -> None:
		self._rows = {}

	def Add(self, setting: str, alpha: float, method: str, metric: str, covered: bool, magnitude: float) -> None:
		key = (setting, alpha, method, metric)
		try:
			row = self._rows[key]
		except KeyError:
			row = CoverageRow(setting, alpha, method, metric)
			self._rows[key] = row
		row.Add(covered, magnitude)

	def __getitem__(self, key: Tuple[str, float, str, str]) -> CoverageRow:
		return self._rows[key]

	def __len__(self) -> int:
		return len(self._rows)

	def __iter__(self) -> Iterator[CoverageRow]:
		return iter(self._rows.values())

	def ToList(self) -> List[Dict[str, Any]]:
		return [
			{
				"setting": row.Key[0], "alpha": row.Key[1], "method": row.Key[2], "metric": row.Key[3],
				"coverage": row.Coverage, "coverage_se": row.CoverageSE, "magnitude": row.Magnitude,
				"magnitude_se": row.MagnitudeSE, "reps": row.Reps
			}
			for row in self._rows.values()
		]
