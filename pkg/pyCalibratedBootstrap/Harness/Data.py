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
Input data: CSV ingestion, the vendored roulette data, the diabetes export and cross-validated Lasso penalties.

CSV files have a header row, comma separated cells, ``.`` as decimal separator and UTF-8 encoding. Missing values are
never imputed.
"""
from csv                             import reader as csv_reader, writer as csv_writer
from math                            import pi
from pathlib                         import Path
from typing                          import Iterable, List, Optional as Nullable, Sequence, Tuple

from numpy                           import ndarray, array, asarray, float64, geomspace, inf, isfinite

from pyTooling.Common                import getResourceFile
from pyTooling.Decorators            import export
from pyTooling.Exceptions            import ToolingException

from pyCalibratedBootstrap           import Resources
from pyCalibratedBootstrap.MathKit   import RngStream, DesignMatrix, AsGenerator, LassoFit
from pyCalibratedBootstrap.Models    import Dataset
from pyCalibratedBootstrap.Harness   import DataParseError, HarnessException


__all__ = ["DIABETES_COLUMNS", "DIABETES_RESPONSE", "ROULETTE_FILE"]

DIABETES_COLUMNS = ("age", "sex", "bmi", "map", "s1", "s2", "s3", "s4", "s5", "s6")   #: Regressor columns of the diabetes schema.
DIABETES_RESPONSE = "y"                                                                #: Response column of the diabetes schema.
ROULETTE_FILE = "Roulette.csv"                                                         #: Vendored roulette wheel angles (degrees).

_MISSING = ("", "na", "nan", "null", "none", "?")


def _ReadRows(path: Path) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
	if not path.exists():
		raise DataParseError(f"Data file '{path}' does not exist.") from FileNotFoundError(f"File '{path}' not found.")

	try:
		with path.open("r", encoding="utf-8", newline="") as file:
			rows = [(lineNumber, row) for lineNumber, row in enumerate(csv_reader(file), start=1) if len(row) > 0]
	except (OSError, UnicodeDecodeError) as ex:
		raise DataParseError(f"Couldn't read data file '{path}'.") from ex

	if len(rows) == 0:
		ex = DataParseError(f"Data file '{path}' is empty.")
		ex.add_note(f"Expected a header row followed by data rows.")
		raise ex

	header = [cell.strip() for cell in rows[0][1]]
	return header, rows[1:]


def _ParseCell(path: Path, lineNumber: int, column: str, cell: str) -> float:
	text = cell.strip()
	if text.lower() in _MISSING:
		ex = DataParseError(f"Missing value in data file '{path}'.")
		ex.add_note(f"Row {lineNumber}, column '{column}'.")
		raise ex

	try:
		value = float(text)
	except ValueError as exc:
		ex = DataParseError(f"Non-numeric cell '{text}' in data file '{path}'.")
		ex.add_note(f"Row {lineNumber}, column '{column}'.")
		raise ex from exc

	if not isfinite(value):
		ex = DataParseError(f"Non-finite cell '{text}' in data file '{path}'.")
		ex.add_note(f"Row {lineNumber}, column '{column}'.")
		raise ex
	return value


@export
def IngestCSV(
	path: Path,
	columns: Sequence[str] = DIABETES_COLUMNS,
	response: str = DIABETES_RESPONSE,
	standardize: bool = True
) -> Dataset:
	"""
	Read a numeric CSV file into a :class:`~pyCalibratedBootstrap.Models.Dataset`.

	With ``standardize`` the regressors are centered and scaled to ``(1/n)Σx² = 1`` (``ddof = 0``) and the response is
	centered.

	:raises DataParseError: For an empty file, a header not matching the schema, a non-numeric or a missing cell. The
	                        location is attached as a note.
	"""
	header, rows = _ReadRows(path)

	expected = list(columns) + [response]
	missing = [name for name in expected if name not in header]
	if len(missing) > 0:
		ex = DataParseError(f"Header of '{path}' lacks column(s): {', '.join(missing)}.")
		ex.add_note(f"Expected columns: {','.join(expected)}")
		ex.add_note(f"Found columns: {','.join(header)}")
		raise ex
	elif len(rows) == 0:
		raise DataParseError(f"Data file '{path}' has a header but no data rows.")

	positions = [header.index(name) for name in expected]
	matrix: List[List[float]] = []
	for lineNumber, row in rows:
		if len(row) != len(header):
			ex = DataParseError(f"Row {lineNumber} of '{path}' has {len(row)} cells, expected {len(header)}.")
			ex.add_note(f"Row {lineNumber}.")
			raise ex
		matrix.append([_ParseCell(path, lineNumber, name, row[position]) for name, position in zip(expected, positions)])

	values = array(matrix, dtype=float64)
	x = DesignMatrix(values[:, :-1], columnNames=columns)
	y = values[:, -1]
	if standardize:
		x = x.Standardize(ddof=0)
		y = y - y.mean()

	return Dataset(y, x, meta=f"csv({path.name})")


@export
def ExportDiabetes(path: Path) -> int:
	"""
	Write scikit-learn's bundled diabetes data (raw, unscaled) in the documented CSV schema.

	:returns: Number of data rows written.
	:raises HarnessException: If scikit-learn is not installed.
	"""
	try:
		from sklearn.datasets import load_diabetes
	except ImportError as ex:
		newEx = HarnessException(f"Exporting the diabetes data needs scikit-learn.")
		newEx.add_note(f"Install it with 'pip install scikit-learn' or supply the CSV file yourself.")
		raise newEx from ex

	bunch = load_diabetes(scaled=False)
	path.parent.mkdir(parents=True, exist_ok=True)
	with path.open("w", encoding="utf-8", newline="") as file:
		writer = csv_writer(file, lineterminator="\n")
		writer.writerow(list(DIABETES_COLUMNS) + [DIABETES_RESPONSE])
		for features, target in zip(bunch.data, bunch.target):
			writer.writerow([repr(float(value)) for value in features] + [repr(float(target))])

	return len(bunch.target)


@export
def LoadRoulette() -> ndarray:
	"""Angles of the vendored roulette wheel data in radians."""
	try:
		resourceFile = getResourceFile(Resources, ROULETTE_FILE)
	except ToolingException as ex:
		raise HarnessException(f"Couldn't locate '{ROULETTE_FILE}' in package resources.") from ex

	header, rows = _ReadRows(Path(resourceFile))
	if "degrees" not in header:
		raise DataParseError(f"Resource '{ROULETTE_FILE}' lacks column 'degrees'.")

	position = header.index("degrees")
	degrees = asarray([_ParseCell(Path(resourceFile), lineNumber, "degrees", row[position]) for lineNumber, row in rows], dtype=float64)
	return degrees * pi / 180.0


@export
def DefaultLambdaGrid(count: int = 50, lower: float = 10.0, upper: float = 2000.0) -> ndarray:
	"""Log-spaced penalty grid from ``lower`` to ``upper``."""
	return geomspace(lower, upper, count)


@export
def CVLambda(
	x: DesignMatrix,
	y: ndarray,
	rng: RngStream,
	folds: int = 10,
	grid: Nullable[Iterable[float]] = None
) -> float:
	"""
	Penalty with the smallest mean held-out squared error in ``folds``-fold cross-validation.

	Rows are assigned to folds by a random permutation drawn from ``rng``. Ties go to the largest penalty.
	"""
	if folds < 2:
		raise ValueError(f"Cross-validation needs at least 2 folds, got {folds}.")

	penalties = sorted(DefaultLambdaGrid() if grid is None else list(grid), reverse=True)
	if len(penalties) == 0:
		raise ValueError(f"Penalty grid must not be empty.")
	elif len(penalties) == 1:
		return float(penalties[0])

	response = asarray(y, dtype=float64)
	n = x.Rows
	if n < folds:
		raise ValueError(f"Cross-validation with {folds} folds needs at least {folds} rows, got {n}.")

	assignment = AsGenerator(rng).permutation(n) % folds
	splits = []
	for fold in range(folds):
		train = (assignment != fold).nonzero()[0]
		test = (assignment == fold).nonzero()[0]
		splits.append((x.Take(train), response[train], x.Entries[test], response[test]))

	best, bestError = penalties[0], inf
	warmStarts: List[Nullable[ndarray]] = [None] * folds
	for penalty in penalties:
		error = 0.0
		for fold, (trainX, trainY, testX, testY) in enumerate(splits):
			beta = LassoFit(trainX, trainY, penalty, warmStart=warmStarts[fold])
			warmStarts[fold] = beta
			residual = testY - testX @ beta
			error += float(residual @ residual)
		error /= n

		# strict improvement keeps the larger penalty on ties
		if error < bestError:
			best, bestError = penalty, error

	return float(best)
