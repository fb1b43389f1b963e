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
Result files written into a scenario's output directory.

Column orders are fixed:

* ``coverage.csv``: ``setting, alpha, method, metric, coverage, coverage_se, magnitude, magnitude_se, reps``
* ``qq.csv``: ``method, statistic, probability, theoretical_q, empirical_q``
* ``trace.csv``: ``setting, alpha, t, m_real, m_int, u_value, z``
* ``histogram.csv``: ``alpha, m, bin_lower, bin_upper, count``

``report.json`` is written with sorted keys so identical results give identical bytes. Timings go to ``timing.json``.
"""
from csv                             import writer as csv_writer
from datetime                        import timedelta
from json                            import dumps
from pathlib                         import Path
from typing                          import Any, Callable, Dict, Iterable, List, Optional as Nullable, Sequence, Tuple

from numpy                           import ndarray, asarray, floating, float64, integer, bool_

from pyTooling.Decorators            import export, readonly
from pyTooling.MetaClasses           import ExtendedType

from pyCalibratedBootstrap           import __version__
from pyCalibratedBootstrap.Calibrate import CalibrationTrace
from pyCalibratedBootstrap.Refine    import ContourHistogram
from pyCalibratedBootstrap.Inference import EmpiricalQuantile
from pyCalibratedBootstrap.Harness   import REPORT_SCHEMA_VERSION, CoverageTable, ScenarioConfig


__all__ = ["COVERAGE_COLUMNS", "QQ_COLUMNS", "TRACE_COLUMNS", "HISTOGRAM_COLUMNS"]

COVERAGE_COLUMNS =  ("setting", "alpha", "method", "metric", "coverage", "coverage_se", "magnitude", "magnitude_se", "reps")
QQ_COLUMNS =        ("method", "statistic", "probability", "theoretical_q", "empirical_q")
TRACE_COLUMNS =     ("setting", "alpha", "t", "m_real", "m_int", "u_value", "z")
HISTOGRAM_COLUMNS = ("alpha", "m", "bin_lower", "bin_upper", "count")


def _Plain(value: Any) -> Any:
	"""Convert numpy scalars, arrays and tuples into JSON-compatible Python values."""
	if isinstance(value, dict):
		return {str(key): _Plain(item) for key, item in value.items()}
	elif isinstance(value, (list, tuple)):
		return [_Plain(item) for item in value]
	elif isinstance(value, ndarray):
		return [_Plain(item) for item in value.tolist()]
	elif isinstance(value, bool_):
		return bool(value)
	elif isinstance(value, integer):
		return int(value)
	elif isinstance(value, floating):
		return float(value)
	elif isinstance(value, Path):
		return value.as_posix()
	return value


def _Cell(value: Any) -> str:
	if value is None:
		return ""
	elif isinstance(value, (float, floating)):
		return repr(float(value))
	return str(value)


def _WriteCSV(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
	path.parent.mkdir(parents=True, exist_ok=True)
	with path.open("w", encoding="utf-8", newline="") as file:
		writer = csv_writer(file, lineterminator="\n")
		writer.writerow(columns)
		for row in rows:
			writer.writerow([_Cell(cell) for cell in row])


def _WriteJSON(path: Path, document: Dict[str, Any]) -> None:
	path.parent.mkdir(parents=True, exist_ok=True)
	path.write_text(dumps(_Plain(document), sort_keys=True, indent=2) + "\n", encoding="utf-8")


@export
def QQProbabilities(count: int) -> List[float]:
	"""Plotting positions ``(i − 0.5)/K`` for ``i = 1 … K``."""
	if count < 1:
		raise ValueError(f"Number of Q-Q points must be at least 1, got {count}.")
	return [(i - 0.5) / count for i in range(1, count + 1)]


@export
class QQTable(metaclass=ExtendedType, slots=True):
	"""Theoretical against empirical quantiles, possibly for several methods and statistics."""

	_rows: List[Tuple[str, str, float, float, float]]

	def __init__(self) -> None:
		self._rows = []

	@readonly
	def Rows(self) -> List[Tuple[str, str, float, float, float]]:
		return self._rows

	def Add(self, method: str, statistic: str, values: Iterable[float], oracle: Callable[[float], float], count: int = 99) -> List[Tuple[str, str, float, float, float]]:
		"""Append ``count`` rows comparing the empirical quantiles of ``values`` with ``oracle``."""
		sample = asarray(list(values), dtype=float64)
		rows = [
			(method, statistic, probability, float(oracle(probability)), EmpiricalQuantile(sample, probability))
			for probability in QQProbabilities(count)
		]
		self._rows.extend(rows)
		return rows

	def MaxRelativeError(self, method: str, statistic: Nullable[str] = None, probabilities: Nullable[Iterable[float]] = None) -> float:
		"""Largest ``|empirical/theoretical − 1|`` over the selected rows."""
		selected = set(probabilities) if probabilities is not None else None
		errors = [
			abs(empirical / theoretical - 1.0)
			for m, s, probability, theoretical, empirical in self._rows
			if m == method and (statistic is None or s == statistic) and (selected is None or probability in selected) and theoretical != 0.0
		]
		return max(errors) if len(errors) > 0 else 0.0

	def Write(self, path: Path) -> None:
		_WriteCSV(path, QQ_COLUMNS, self._rows)


@export
def EmitQQ(values: Iterable[float], oracle: Callable[[float], float], path: Path, count: int = 99, method: str = "", statistic: str = "") -> QQTable:
	"""Write a single-method ``qq.csv``."""
	table = QQTable()
	table.Add(method, statistic, values, oracle, count)
	table.Write(path)
	return table


@export
def WriteCoverage(path: Path, table: CoverageTable) -> None:
	_WriteCSV(path, COVERAGE_COLUMNS, (row.ToRow() for row in table))


@export
def TraceRows(setting: str, traces: Iterable[CalibrationTrace]) -> List[Tuple[str, float, int, float, int, float, float]]:
	return [
		(setting, trace.Alpha, record.Iteration, record.MReal, record.MInt, record.UValue, record.Z)
		for trace in traces
		for record in trace.Records
	]


@export
def WriteTrace(path: Path, rows: Iterable[Sequence[Any]]) -> None:
	_WriteCSV(path, TRACE_COLUMNS, rows)


@export
def WriteHistogram(path: Path, histogram: ContourHistogram) -> None:
	_WriteCSV(path, HISTOGRAM_COLUMNS, histogram.Rows())


@export
def WriteReport(path: Path, config: ScenarioConfig, results: Dict[str, Any], notes: Iterable[str] = ()) -> None:
	"""Versioned ``report.json``: resolved configuration, its digest, the seed, results and notes."""
	_WriteJSON(path, {
		"schema_version": REPORT_SCHEMA_VERSION,
		"scenario": config.Scenario.value,
		"config": config.ToDict(),
		"config_digest": config.Digest,
		"seed": config.Seed,
		"results": results,
		"notes": list(notes)
	})


@export
def WriteTiming(path: Path, durations: Dict[str, timedelta], threads: int) -> None:
	_WriteJSON(path, {
		"version": __version__,
		"threads": threads,
		"durations_s": {name: duration.total_seconds() for name, duration in durations.items()}
	})


@export
def WriteError(path: Path, ex: BaseException) -> None:
	"""Machine-readable error record ``error.json``."""
	_WriteJSON(path, {
		"schema_version": REPORT_SCHEMA_VERSION,
		"error": str(ex),
		"type": type(ex).__name__,
		"notes": list(getattr(ex, "__notes__", []))
	})
