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
Executable scenarios behind ``cb run``.

A :class:`ScenarioRunner` executes one resolved :class:`~pyCalibratedBootstrap.Harness.ScenarioConfig` and collects
results, Q-Q rows, coverage rows and calibration traces; :meth:`ScenarioRunner.Write` stores them in the output
directory. Progress and diagnostic notes are forwarded to the owning terminal application, if any.

All random numbers are derived from the configured seed. The first level of the stream tree is the repetition (for the
Lasso study: the setting, then the repetition), the second level is one of the ``_STREAM_*`` purposes below. Results
therefore do not depend on the worker count.
"""
from datetime                        import timedelta
from math                            import sqrt
from time                            import perf_counter_ns
from typing                          import Any, Callable, Dict, List, Optional as Nullable, Sequence, Tuple, TypeVar

from numpy                           import eye, float64, zeros
from scipy.linalg                    import solve_triangular

from pyTooling.Decorators            import export, readonly
from pyTooling.TerminalUI            import ILineTerminal

from pyCalibratedBootstrap.MathKit   import RngStream, DesignMatrix, LassoFit, LeastSquares, NormalQuantile, ReidSigma2
from pyCalibratedBootstrap.MathKit   import DegenerateError, ParallelMap
from pyCalibratedBootstrap.Models    import Dataset, GaussianMeanModel, LinearRegressionModel, LassoModel
from pyCalibratedBootstrap.Models    import SoftThresholdMeanModel
from pyCalibratedBootstrap.Contour   import Association, FullAssociation, ProfileAssociation
from pyCalibratedBootstrap.Calibrate import RaConfig, CalibrationTrace, CandidateDraw, RARun, MOutOfNPool
from pyCalibratedBootstrap.Refine    import RefinedSample, RADRPipeline, ContourHistogram, KSUniform
from pyCalibratedBootstrap.Inference import Sample, QuadraticFormStatistic, AbsoluteDeviationStatistic
from pyCalibratedBootstrap.Inference import JointRegionThreshold, MarginalInterval, LossOrderInterval, ContourOrderInterval
from pyCalibratedBootstrap.Inference import StandardBootstrap, ResidualBootstrap, ParametricBootstrap, FiducialOracleSample
from pyCalibratedBootstrap.Inference import ScaledChiSquareQuantile, FTypeQuantile, HalfNormalQuantile
from pyCalibratedBootstrap.Inference import JointCovered, MarginalCovered, InferenceReport
from pyCalibratedBootstrap.Harness   import Scenario, ScenarioConfig, CoverageTable, ConfigurationError
from pyCalibratedBootstrap.Harness   import LASSO_FULL_SCALE, LASSO_FULL_SCALE_REPS
from pyCalibratedBootstrap.Harness.Data     import IngestCSV, LoadRoulette, CVLambda
from pyCalibratedBootstrap.Harness.Output   import QQTable, TraceRows, WriteCoverage, WriteHistogram, WriteReport
from pyCalibratedBootstrap.Harness.Output   import WriteTiming, WriteTrace
from pyCalibratedBootstrap.Harness.VonMises import EVALUATION_POINTS, LocationGrid, VonMisesGridDR, VonMisesFiducialCDF


__all__ = ["TRUE_MEAN", "LEADING_COEFFICIENT"]

TRUE_MEAN = 1.0             #: Location of the simulated normal samples (mean and soft-threshold scenarios).
LEADING_COEFFICIENT = 3.0   #: First entry of the simulated regression coefficients; all others are zero.

_STREAM_DATA =      0
_STREAM_CB =        1
_STREAM_STANDARD =  2
_STREAM_RESIDUAL =  3
_STREAM_GAUSSIAN =  4
_STREAM_STUDENT =   5
_STREAM_ORACLE =    6
_STREAM_AUX =       7

_QQ_COUNT = 99

_Result = TypeVar("_Result")


@export
def SimulateRegression(n: int, p: int, sigma: float, rng: RngStream, standardize: bool = False) -> Dataset:
	"""
	``y = Xβ + σε`` with ``Xᵢⱼ ~ N(0, 1)`` and ``β = (3, 0, …, 0)``.

	With ``standardize`` every column is rescaled to sample standard deviation 1 (``ddof = 1``). The true coefficients are
	stored as the dataset's origin.
	"""
	generator = rng.Generator()
	x = DesignMatrix(generator.standard_normal((n, p)))
	if standardize:
		x = x.Standardize(ddof=1)

	beta = zeros(p, dtype=float64)
	beta[0] = LEADING_COEFFICIENT
	y = x.Entries @ beta + sigma * generator.standard_normal(n)
	return Dataset(y, x, meta=f"regression(n={n}, p={p})", origin=beta)


def _Setting(n: int, p: Nullable[int] = None, penalty: Nullable[float] = None) -> str:
	setting = f"n={n}"
	if p is not None:
		setting += f",p={p}"
	if penalty is not None:
		setting += f",lambda={penalty:g}"
	return setting


def _MarginalScale(x: DesignMatrix, index: int) -> float:
	"""``√((X'X)⁻¹ⱼⱼ)`` from the triangular factor of ``X``."""
	_, r = x.QR
	inverse = solve_triangular(r, eye(r.shape[0]), lower=False)
	return float(sqrt(inverse[index] @ inverse[index]))


def _LassoRaConfig(alpha: float, values: Tuple[int, float, int, Any, Any, Any]) -> RaConfig:
	innerCount, stepScale, iterations, lowerClip, upperClip, initial = values
	return RaConfig(alpha, innerCount, stepScale, iterations, lowerClip, upperClip, initial)


_LassoTask = Tuple[int, Tuple[int, ...], int, int, float, Tuple[float, ...], Tuple[float, ...], Tuple[int, float, int, Any, Any, Any], int, bool]
_CoverageEntry = Tuple[float, str, str, bool, float]


@export
def LassoReplicate(task: _LassoTask) -> Tuple[List[_CoverageEntry], List[CalibrationTrace], List[str]]:
	"""
	One repetition of the simulated Lasso study.

	The task is a plain tuple ``(seed, streamPath, n, p, penalty, alphaSet, alphas, raSettings, poolSize, keepTraces)``
	so repetitions can run in worker processes. Returns coverage entries ``(alpha, method, metric, covered,
	magnitude)``, the calibration traces (only with ``keepTraces``) and diagnostic notes.
	"""
	seed, path, n, p, penalty, alphaSet, alphas, raSettings, poolSize, keepTraces = task
	stream = RngStream(seed, path)

	data = SimulateRegression(n, p, 1.0, stream.Child(_STREAM_DATA), standardize=True)
	x = data.X
	beta = LassoFit(x, data.Y, penalty)
	model = LassoModel(penalty, ReidSigma2(x, data.Y, beta))
	truth = data.Origin

	refined = RADRPipeline(model, data, alphaSet, _LassoRaConfig(alphaSet[0], raSettings), stream.Child(_STREAM_CB), bOut=poolSize)
	samples: List[Tuple[str, Sample]] = [
		("cb", refined),
		("standard_bootstrap", StandardBootstrap(model, data, poolSize, stream.Child(_STREAM_STANDARD))),
		("residual_bootstrap", ResidualBootstrap(model, data, poolSize, stream.Child(_STREAM_RESIDUAL)))
	]

	statistic = QuadraticFormStatistic(model.CachedFit(data), x.Gram, float(p))
	entries: List[_CoverageEntry] = []
	for alpha in alphas:
		for method, sample in samples:
			q = JointRegionThreshold(sample, statistic, alpha)
			entries.append((alpha, method, "joint", JointCovered(statistic, q, truth), q))

			interval = MarginalInterval(sample, 0, alpha, center=model.CachedFit(data))
			entries.append((alpha, method, "marginal", MarginalCovered(interval, float(truth[0])), interval[1] - interval[0]))

	notes = [note for trace in refined.Traces for note in trace.Notes]
	return entries, list(refined.Traces) if keepTraces else [], notes


@export
class ScenarioRunner(ILineTerminal):
	"""
	Executes a scenario and collects its results.

	:param config:   Resolved scenario configuration.
	:param terminal: Terminal application receiving progress messages, or ``None`` for silent runs.
	"""

	_config:     ScenarioConfig
	_root:       RngStream
	_results:    Dict[str, Any]
	_reports:    List[InferenceReport]
	_notes:      List[str]
	_durations:  Dict[str, timedelta]
	_traceRows:  List[Tuple[Any, ...]]
	_qq:         QQTable
	_coverage:   CoverageTable
	_histogram:  Nullable[ContourHistogram]

	def __init__(self, config: ScenarioConfig, terminal=None) -> None:
		super().__init__(terminal)

		self._config = config
		self._root = RngStream(config.Seed)
		self._results = {}
		self._reports = []
		self._notes = []
		self._durations = {}
		self._traceRows = []
		self._qq = QQTable()
		self._coverage = CoverageTable()
		self._histogram = None

	@readonly
	def Config(self) -> ScenarioConfig:
		return self._config

	@readonly
	def Results(self) -> Dict[str, Any]:
		return self._results

	@readonly
	def Reports(self) -> List[InferenceReport]:
		return self._reports

	@readonly
	def Notes(self) -> List[str]:
		return self._notes

	@readonly
	def Durations(self) -> Dict[str, timedelta]:
		return self._durations

	@readonly
	def Trace(self) -> List[Tuple[Any, ...]]:
		return self._traceRows

	@readonly
	def QQ(self) -> QQTable:
		return self._qq

	@readonly
	def Coverage(self) -> CoverageTable:
		return self._coverage

	@readonly
	def Histogram(self) -> Nullable[ContourHistogram]:
		return self._histogram

	def _Timed(self, name: str, function: Callable[[], _Result]) -> _Result:
		start = perf_counter_ns()
		result = function()
		end = perf_counter_ns()
		self._durations[name] = timedelta(microseconds=(end - start) // 1000)
		self.WriteDebug(f"  {name}: {(end - start) / 1e9:.3f} s")
		return result

	def _Note(self, note: str, routine: bool = False) -> None:
		if note not in self._notes:
			self._notes.append(note)
		if routine:
			self.WriteVerbose(f"  {note}")
		else:
			self.WriteWarning(note)

	def _CollectTraces(self, setting: str, traces: Sequence[CalibrationTrace]) -> List[Dict[str, Any]]:
		self._traceRows.extend(TraceRows(setting, traces))
		for trace in traces:
			for note in trace.Notes:
				self._Note(note, routine=True)
			if trace.ClipCount > 0:
				self._Note(f"Calibration at alpha={trace.Alpha:g} ({setting}) was clipped {trace.ClipCount} time(s).", routine=True)

		return [
			{"alpha": trace.Alpha, "m_alpha": trace.MAlpha, "clip_count": trace.ClipCount, "tail_sd": trace.TailStandardDeviation, "converged": trace.Converged}
			for trace in traces
		]

	def _AddReport(self, report: InferenceReport) -> InferenceReport:
		self._reports.append(report)
		return report

	def Run(self) -> "ScenarioRunner":
		"""Execute the configured scenario."""
		scenario = self._config.Scenario
		self.WriteNormal(f"Running scenario '{scenario}' with seed {self._config.Seed} ...")

		dispatch: Dict[Scenario, Callable[[], None]] = {
			Scenario.MeanSimple:     self._RunMeanSimple,
			Scenario.SoftThreshMean: self._RunSoftThreshMean,
			Scenario.LRJoint:        self._RunLRJoint,
			Scenario.LRMarginal:     self._RunLRMarginal,
			Scenario.LassoSim:       self._RunLassoSim,
			Scenario.LassoDiabetes:  self._RunLassoDiabetes,
			Scenario.VonMisesDR:     self._RunVonMisesDR
		}
		self._Timed("total", dispatch[scenario])
		self._results["reports"] = [report.ToDict() for report in self._reports]
		if len(self._coverage) > 0:
			self._results["coverage"] = self._coverage.ToList()

		return self

	def Write(self) -> None:
		"""Write ``report.json``, ``timing.json`` and, if collected, ``coverage.csv``, ``qq.csv``, ``trace.csv`` and
		``histogram.csv`` into the output directory."""
		directory = self._config.OutputDirectory
		directory.mkdir(parents=True, exist_ok=True)

		WriteReport(directory / "report.json", self._config, self._results, self._notes)
		if len(self._coverage) > 0:
			WriteCoverage(directory / "coverage.csv", self._coverage)
		if len(self._qq.Rows) > 0:
			self._qq.Write(directory / "qq.csv")
		if len(self._traceRows) > 0:
			WriteTrace(directory / "trace.csv", self._traceRows)
		if self._histogram is not None:
			WriteHistogram(directory / "histogram.csv", self._histogram)
		WriteTiming(directory / "timing.json", self._durations, self._config.Threads)

		self.WriteVerbose(f"Results written to '{directory}'.")

	# -------------------------------------------------------------------------------------------------------------------
	# Scalar scenarios
	# -------------------------------------------------------------------------------------------------------------------
	def _RunMeanSimple(self) -> None:
		config = self._config
		n = config.N
		model = GaussianMeanModel(1.0)

		cb = self._AddReport(InferenceReport("cb", "per-alpha-pool", config.Alphas))
		contourOrder = self._AddReport(InferenceReport("cb-contour-order", "per-alpha-pool", config.Alphas))
		theory = self._AddReport(InferenceReport("theoretical", "baseline", config.Alphas))
		setting = _Setting(n)

		for rep in range(config.Reps):
			self.WriteVerbose(f"  repetition {rep + 1}/{config.Reps}")
			stream = self._root.Child(rep)
			data = Dataset(TRUE_MEAN + stream.Child(_STREAM_DATA).Generator().standard_normal(n), meta="normal-mean")
			mean = float(data.Y.mean())

			traces: List[CalibrationTrace] = []
			for k, alpha in enumerate(config.Alphas):
				mAlpha, trace, _ = RARun(model, data, config.RaConfig(alpha), stream.Child(_STREAM_CB).Child(k), config.Threads)
				traces.append(trace)
				pool = MOutOfNPool(model, data, mAlpha, config.PoolSize, config.NMC, stream.Child(_STREAM_STANDARD).Child(k), alpha, config.Threads)

				half = NormalQuantile(1.0 - alpha / 2.0) / sqrt(n)
				intervals = {
					"cb": LossOrderInterval(pool, alpha),
					"cb-contour-order": ContourOrderInterval(pool, alpha),
					"theoretical": (mean - half, mean + half)
				}
				for method, interval in intervals.items():
					self._coverage.Add(setting, alpha, method, "marginal", MarginalCovered(interval, TRUE_MEAN), interval[1] - interval[0])

				if rep == 0:
					cb.AddInterval("theta", alpha, intervals["cb"])
					contourOrder.AddInterval("theta", alpha, intervals["cb-contour-order"])
					theory.AddInterval("theta", alpha, intervals["theoretical"])
					cb.Metadata[f"m_alpha({alpha:g})"] = mAlpha

			calibration = self._CollectTraces(setting if config.Reps == 1 else f"{setting},rep={rep}", traces)
			if rep == 0:
				self._results["sample_mean"] = mean
				self._results["calibration"] = calibration

	def _RunSoftThreshMean(self) -> None:
		config = self._config
		n = config.N
		model = SoftThresholdMeanModel(config.Lambda, config.Convention)
		for note in model.Notes:
			self._Note(note, routine=True)

		data = Dataset(TRUE_MEAN + self._root.Child(_STREAM_DATA).Generator().standard_normal(n), meta="normal-mean")
		raConfig = config.RaConfig(config.AlphaSet[0])

		refined = self._Timed("ra_dr", lambda: RADRPipeline(model, data, config.AlphaSet, raConfig, self._root.Child(_STREAM_CB), config.PoolSize, config.Threads))
		control = self._Timed("control", lambda: MOutOfNPool(model, data, n, config.PoolSize, config["B"], self._root.Child(_STREAM_STANDARD), workers=config.Threads))
		controlKS = KSUniform(draw.UValue for draw in control)
		if controlKS > 0.1:
			self._Note(f"Contour values of the standard bootstrap pool are not uniform (KS = {controlKS:.3f}).", routine=True)

		cb = self._AddReport(InferenceReport("cb", "refined-sample", config.Alphas))
		standard = self._AddReport(InferenceReport("standard_bootstrap", "baseline", config.Alphas))
		center = model.CachedFit(data)
		for alpha in config.Alphas:
			cb.AddInterval("theta", alpha, MarginalInterval(refined, 0, alpha))
			standard.AddInterval("theta", alpha, MarginalInterval(control, 0, alpha, center=center))

		poolU = [draw.UValue for draw in refined.Pool]
		self._results.update({
			"estimate": float(center[0]),
			"ks_refined": refined.KSStatistic,
			"ks_standard_bootstrap": controlKS,
			"pool_size": len(refined.Pool),
			"pool_u_min": min(poolU),
			"pool_u_max": max(poolU),
			"calibration": self._CollectTraces(_Setting(n), refined.Traces)
		})

		if config.EmitContourHistogram:
			def perAlphaPool(k: int) -> List[CandidateDraw]:
				alpha = config.AlphaSet[k]
				mAlpha = refined.MAlphas[alpha]
				return MOutOfNPool(model, data, mAlpha, config.PoolSize, config["B"], self._root.Child(_STREAM_AUX).Child(k), alpha, config.Threads)

			pools = self._Timed("histogram", lambda: [draw for k in range(len(config.AlphaSet)) for draw in perAlphaPool(k)])
			self._histogram = ContourHistogram(pools + list(control))

	# -------------------------------------------------------------------------------------------------------------------
	# Linear regression scenarios
	# -------------------------------------------------------------------------------------------------------------------
	def _RegressionSamples(self, model: LinearRegressionModel, association: Association, data: Dataset, stream: RngStream) -> Tuple[RefinedSample, Dict[str, Sample]]:
		config = self._config
		threads = config.Threads
		count = config.PoolSize

		refined = RADRPipeline(association, data, config.AlphaSet, config.RaConfig(config.AlphaSet[0]), stream.Child(_STREAM_CB), count, threads)
		samples: Dict[str, Sample] = {
			"cb": refined,
			"standard_bootstrap":  StandardBootstrap(association, data, count, stream.Child(_STREAM_STANDARD), threads),
			"residual_bootstrap":  ResidualBootstrap(model, data, count, stream.Child(_STREAM_RESIDUAL), threads),
			"parametric_gaussian": ParametricBootstrap(model, data, count, "gaussian", stream.Child(_STREAM_GAUSSIAN), threads),
			"parametric_t":        ParametricBootstrap(model, data, count, "student_t", stream.Child(_STREAM_STUDENT), threads),
			"oracle":              FiducialOracleSample(data, count, model.Sigma, stream.Child(_STREAM_ORACLE))
		}
		return refined, samples

	def _RegressionModel(self) -> Tuple[int, int, LinearRegressionModel]:
		config = self._config
		n, p = config.N, config.P
		if n <= p:
			ex = ConfigurationError(f"Regression scenario needs n > p (n = {n}, p = {p}).")
			ex.add_note(f"Lower 'kappa' or 'p', or raise 'n'.")
			raise ex

		model = LinearRegressionModel(config.Sigma)
		if not model.KnownSigma:
			self._Note(f"Noise level is estimated; the oracle is the scaled F-type distribution.", routine=True)
		return n, p, model

	def _PerAlphaPools(self, association: Association, data: Dataset, refined: RefinedSample, stream: RngStream) -> Dict[float, List[CandidateDraw]]:
		"""Fixed-size pools at the calibrated ``m_α`` of every level, without inner simulations."""
		config = self._config
		return {
			alpha: MOutOfNPool(association, data, refined.MAlphas[alpha], config.PoolSize, 0, stream.Child(k), alpha, config.Threads)
			for k, alpha in enumerate(config.AlphaSet)
		}

	def _RunLRJoint(self) -> None:
		config = self._config
		n, p, model = self._RegressionModel()
		association = FullAssociation(model)
		setting = _Setting(n, p)

		for rep in range(config.Reps):
			self.WriteVerbose(f"  repetition {rep + 1}/{config.Reps}")
			stream = self._root.Child(rep)
			data = SimulateRegression(n, p, 1.0 if config.Sigma is None else config.Sigma, stream.Child(_STREAM_DATA))
			refined, samples = self._Timed(f"samples[{rep}]", lambda: self._RegressionSamples(model, association, data, stream))

			thetaHat = model.CachedFit(data)
			betaHat = model.Coefficients(thetaHat)
			if model.KnownSigma:
				scale = p * model.Sigma ** 2
				def oracle(level: float) -> float:
					return ScaledChiSquareQuantile(level, p)
			else:
				scale = p * (n / (n - p)) * model.NoiseLevel(thetaHat) ** 2
				def oracle(level: float) -> float:
					return FTypeQuantile(level, p, n - p) / p

			statistic = QuadraticFormStatistic(betaHat, data.X.Gram, scale)
			perAlpha = self._PerAlphaPools(association, data, refined, stream.Child(_STREAM_AUX)) if rep == 0 else {}

			for alpha in config.Alphas:
				for method, sample in samples.items():
					q = JointRegionThreshold(sample, statistic, alpha)
					self._coverage.Add(setting, alpha, method, "joint", JointCovered(statistic, q, data.Origin), q)

			if rep > 0:
				continue

			reports = {method: self._AddReport(InferenceReport(method, "refined-sample" if method == "cb" else "baseline", config.Alphas)) for method in samples}
			reports["cb"].Metadata["ks"] = refined.KSStatistic
			perAlphaReport = self._AddReport(InferenceReport("cb", "per-alpha-pool", config.AlphaSet))
			truth = self._AddReport(InferenceReport("truth", "baseline", config.Alphas))
			for alpha in config.Alphas:
				truth.AddThreshold(alpha, oracle(1.0 - alpha))
				for method, sample in samples.items():
					reports[method].AddThreshold(alpha, JointRegionThreshold(sample, statistic, alpha))
			for alpha, pool in perAlpha.items():
				perAlphaReport.AddThreshold(alpha, JointRegionThreshold(pool, statistic, alpha))
				perAlphaReport.Metadata[f"m_alpha({alpha:g})"] = refined.MAlphas[alpha]

			for method, sample in samples.items():
				values = statistic.Values(sample.Thetas)
				self._qq.Add(method, "joint", values, oracle, _QQ_COUNT)

			for method in samples:
				if not reports[method].IsNested:
					self._Note(f"Region thresholds of '{method}' are not nested over the significance levels.")

			self._results.update({
				"ks_refined": refined.KSStatistic,
				"qq_max_relative_error": {method: self._qq.MaxRelativeError(method) for method in samples},
				"calibration": self._CollectTraces(setting, refined.Traces)
			})

	def _RunLRMarginal(self) -> None:
		config = self._config
		n, p, model = self._RegressionModel()
		association = ProfileAssociation(model, 0)
		setting = _Setting(n, p)
		reports: Dict[str, InferenceReport] = {}

		for rep in range(config.Reps):
			self.WriteVerbose(f"  repetition {rep + 1}/{config.Reps}")
			stream = self._root.Child(rep)
			data = SimulateRegression(n, p, 1.0 if config.Sigma is None else config.Sigma, stream.Child(_STREAM_DATA))
			refined, samples = self._Timed(f"samples[{rep}]", lambda: self._RegressionSamples(model, association, data, stream))

			thetaHat = model.CachedFit(data)
			sigma = model.NoiseLevel(thetaHat) * sqrt(n / (n - p)) if not model.KnownSigma else model.Sigma
			scale = sigma * _MarginalScale(data.X, 0)

			def oracle(level: float) -> float:
				return HalfNormalQuantile(level, scale)

			estimate = float(thetaHat[0])
			for alpha in config.Alphas:
				half = oracle(1.0 - alpha)
				intervals = {method: MarginalInterval(sample, 0, alpha, center=thetaHat) for method, sample in samples.items()}
				intervals["theoretical"] = (estimate - half, estimate + half)
				for method, interval in intervals.items():
					self._coverage.Add(setting, alpha, method, "marginal", MarginalCovered(interval, LEADING_COEFFICIENT), interval[1] - interval[0])

				if rep == 0:
					for method, interval in intervals.items():
						if method not in reports:
							reports[method] = self._AddReport(InferenceReport(method, "refined-sample" if method == "cb" else "baseline", config.Alphas))
						reports[method].AddInterval("beta_1", alpha, interval)

			if rep > 0:
				continue

			if not model.KnownSigma:
				self._Note(f"Half-normal reference uses the estimated noise level.", routine=True)
			statistic = AbsoluteDeviationStatistic(thetaHat, 0)
			for method, sample in samples.items():
				self._qq.Add(method, "marginal", statistic.Values(sample.Thetas), oracle, _QQ_COUNT)

			self._results.update({
				"estimate": estimate,
				"ks_refined": refined.KSStatistic,
				"qq_max_relative_error": {method: self._qq.MaxRelativeError(method) for method in samples},
				"calibration": self._CollectTraces(setting, refined.Traces)
			})

	# -------------------------------------------------------------------------------------------------------------------
	# Lasso scenarios
	# -------------------------------------------------------------------------------------------------------------------
	def _LassoSettings(self) -> List[Tuple[int, int, Any]]:
		config = self._config
		if config.FullScale:
			return [(n, p, penalty) for n, p, penalty in LASSO_FULL_SCALE]
		return [(config.N, config.P, config.Lambda)]

	def _RunLassoSim(self) -> None:
		config = self._config
		reps = LASSO_FULL_SCALE_REPS if config.FullScale and config["reps"] == 200 else config.Reps
		config.RaConfig(config.AlphaSet[0])
		raSettings = (config["B"], config["d"], config["T"], config["M_l"], config["M_u"], config["m0"])

		settings = []
		for index, (n, p, penalty) in enumerate(self._LassoSettings()):
			if penalty == "cv":
				data = SimulateRegression(n, p, 1.0, self._root.Child(index).Child(0).Child(_STREAM_DATA), standardize=True)
				penalty = CVLambda(data.X, data.Y, self._root.Child(index).Child(0).Child(_STREAM_AUX))
				self._Note(f"Penalty for n={n}, p={p} selected by cross-validation: lambda={penalty:.4g}.", routine=True)
			settings.append((index, n, p, float(penalty)))

		for index, n, p, penalty in settings:
			setting = _Setting(n, p, penalty)
			self.WriteNormal(f"  setting {setting}: {reps} repetitions")
			tasks: List[_LassoTask] = [
				(config.Seed, (index, rep), n, p, penalty, tuple(config.AlphaSet), tuple(config.Alphas), raSettings, config.PoolSize, rep == 0)
				for rep in range(reps)
			]
			outcomes = self._Timed(setting, lambda: ParallelMap(LassoReplicate, tasks, config.Threads, processes=True))

			for entries, traces, notes in outcomes:
				for alpha, method, metric, covered, magnitude in entries:
					label = "residual (non-debiased)" if method == "residual_bootstrap" else method
					self._coverage.Add(setting, alpha, label, metric, covered, magnitude)
				for note in notes:
					self._Note(note, routine=True)
				if len(traces) > 0:
					self._results.setdefault("calibration", {})[setting] = self._CollectTraces(setting, traces)

		self._results["settings"] = [{"n": n, "p": p, "lambda": penalty, "reps": reps} for _, n, p, penalty in settings]

	def _RunLassoDiabetes(self) -> None:
		config = self._config
		data = IngestCSV(config.DataFile)
		x = data.X
		n, p = x.Rows, x.Columns

		penalty = config.Lambda
		if penalty == "cv":
			penalty = CVLambda(x, data.Y, self._root.Child(_STREAM_AUX))
			self._Note(f"Penalty selected by 10-fold cross-validation: lambda={penalty:.4g}.", routine=True)

		beta = LassoFit(x, data.Y, penalty)
		selected = [index for index in range(p) if beta[index] != 0.0]
		if len(selected) == 0:
			raise DegenerateError(f"Penalty lambda={penalty} removes every variable.")
		if n <= p:
			raise DegenerateError(f"Noise variance needs n > p (n = {n}, p = {p}).")

		ols = LeastSquares(x, data.Y)
		residual = data.Y - x.Entries @ ols
		variance = float(residual @ residual) / (n - p)
		model = LassoModel(penalty, variance)

		refined = self._Timed("ra_dr", lambda: RADRPipeline(model, data, config.AlphaSet, config.RaConfig(config.AlphaSet[0]), self._root.Child(_STREAM_CB), config.PoolSize, config.Threads))
		standard = self._Timed("standard_bootstrap", lambda: StandardBootstrap(model, data, config.PoolSize, self._root.Child(_STREAM_STANDARD), config.Threads))

		cb = self._AddReport(InferenceReport("cb", "refined-sample", config.Alphas))
		boot = self._AddReport(InferenceReport("standard_bootstrap", "baseline", config.Alphas))
		thetaHat = model.CachedFit(data)

		variables = []
		for index in selected:
			name = x.ColumnNames[index]
			row: Dict[str, Any] = {"name": name, "estimate": float(thetaHat[index]), "intervals": []}
			for alpha in config.Alphas:
				cbInterval = MarginalInterval(refined, index, alpha)
				bootInterval = MarginalInterval(standard, index, alpha)
				cb.AddInterval(name, alpha, cbInterval)
				boot.AddInterval(name, alpha, bootInterval)
				row["intervals"].append({
					"alpha": alpha,
					"cb": list(cbInterval),
					"cb_contains_zero": MarginalCovered(cbInterval, 0.0),
					"standard_bootstrap": list(bootInterval),
					"standard_bootstrap_contains_zero": MarginalCovered(bootInterval, 0.0)
				})
			variables.append(row)

		self._results.update({
			"n": n,
			"p": p,
			"lambda": float(penalty),
			"noise_variance": variance,
			"selected": [x.ColumnNames[index] for index in selected],
			"variables": variables,
			"ks_refined": refined.KSStatistic,
			"calibration": self._CollectTraces(_Setting(n, p, penalty), refined.Traces)
		})

	# -------------------------------------------------------------------------------------------------------------------
	# Circular scenario
	# -------------------------------------------------------------------------------------------------------------------
	def _RunVonMisesDR(self) -> None:
		config = self._config
		angles = LoadRoulette()
		data = Dataset(angles, meta="roulette")
		kappa = config.Kappa

		result = self._Timed("grid_dr", lambda: VonMisesGridDR(data, kappa, LocationGrid(config.GridSize), config.NMC, self._root.Child(_STREAM_CB), config.PoolSize, config.Threads))
		exact = VonMisesFiducialCDF(angles, kappa, EVALUATION_POINTS, "resultant")
		reference = VonMisesFiducialCDF(angles, kappa, EVALUATION_POINTS, "mean-resultant")

		self._Note(f"Reference CDF 'mean_resultant' uses concentration kappa*R/n; the exact fiducial CDF uses kappa*R.", routine=True)
		self._results.update({
			"n": data.Size,
			"kappa": kappa,
			"estimate": float(result.Sample.Center[0]),
			"ks_refined": result.Sample.KSStatistic,
			"cdf": [
				{"theta": theta, "dr": dr, "fiducial_resultant": fr, "fiducial_mean_resultant": fm}
				for (theta, dr), (_, fr), (_, fm) in zip(result.CDF(EVALUATION_POINTS), exact, reference)
			]
		})


@export
def RunScenario(config: ScenarioConfig, terminal=None) -> ScenarioRunner:
	"""Run the scenario described by ``config`` and write its result files."""
	runner = ScenarioRunner(config, terminal)
	runner.Run()
	runner.Write()
	return runner
