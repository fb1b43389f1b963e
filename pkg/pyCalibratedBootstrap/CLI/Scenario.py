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
from argparse import Namespace
from pathlib  import Path
from typing   import Any, Dict, Optional as Nullable

from pyTooling.MetaClasses                    import ExtendedType
from pyTooling.Attributes.ArgParse            import CommandHandler
from pyTooling.Attributes.ArgParse.Argument   import StringArgument
from pyTooling.Attributes.ArgParse.Flag       import LongFlag
from pyTooling.Attributes.ArgParse.ValuedFlag import LongValuedFlag

from pyCalibratedBootstrap                    import CalibratedBootstrapException
from pyCalibratedBootstrap.Harness            import HarnessException, ScenarioConfig
from pyCalibratedBootstrap.Harness.Data       import ExportDiabetes
from pyCalibratedBootstrap.Harness.Output     import WriteError
from pyCalibratedBootstrap.Harness.Scenarios  import RunScenario


#: Argument destination → configuration key of valued flags.
_VALUED_FLAGS = {
	"seed": "seed", "n": "n", "p": "p", "kappa": "kappa", "sigma": "sigma", "alpha": "alpha", "alpha_set": "alpha_set",
	"reps": "reps", "penalty": "lambda", "out": "out", "threads": "threads", "data": "data", "convention": "convention",
	"innerCount": "B", "iterations": "T", "pool_size": "pool_size"
}

EXIT_CONFIGURATION = 2   #: Exit code for configuration and input data errors.
EXIT_NUMERIC =       3   #: Exit code for numerical failures.


class ScenarioHandlers(metaclass=ExtendedType, mixin=True):
	@CommandHandler("run", help="Run a scenario.", description="Run a scenario and write its result files.")
	@StringArgument(dest="Scenario", metaName="Scenario", help="Scenario name, e.g. 'mean-simple' or 'lasso-sim'.")
	@LongValuedFlag("--config", dest="config", metaName="File", optional=True, help="Flat YAML configuration file.")
	@LongValuedFlag("--seed", dest="seed", metaName="N", optional=True, help="Seed of all random streams (mandatory).")
	@LongValuedFlag("--n", dest="n", metaName="N", optional=True, help="Sample size.")
	@LongValuedFlag("--p", dest="p", metaName="N", optional=True, help="Number of regressors.")
	@LongValuedFlag("--kappa", dest="kappa", metaName="R", optional=True, help="Ratio p/n, or the von Mises concentration.")
	@LongValuedFlag("--sigma", dest="sigma", metaName="R|unknown", optional=True, help="Noise level.")
	@LongValuedFlag("--alpha", dest="alpha", metaName="List", optional=True, help="Comma separated significance levels to report.")
	@LongValuedFlag("--alpha-set", dest="alpha_set", metaName="List", optional=True, help="Comma separated significance levels to calibrate.")
	@LongValuedFlag("--reps", dest="reps", metaName="N", optional=True, help="Number of repetitions.")
	@LongValuedFlag("--lambda", dest="penalty", metaName="R|cv", optional=True, help="Lasso penalty or 'cv'.")
	@LongValuedFlag("--out", dest="out", metaName="Directory", optional=True, help="Output directory.")
	@LongValuedFlag("--threads", dest="threads", metaName="N", optional=True, help="Number of workers.")
	@LongValuedFlag("--data", dest="data", metaName="File", optional=True, help="Input CSV file.")
	@LongValuedFlag("--convention", dest="convention", metaName="loss|verbatim", optional=True, help="Soft-threshold convention.")
	@LongValuedFlag("--B", dest="innerCount", metaName="N", optional=True, help="Inner Monte-Carlo simulations per calibration step.")
	@LongValuedFlag("--T", dest="iterations", metaName="N", optional=True, help="Calibration iterations.")
	@LongValuedFlag("--pool-size", dest="pool_size", metaName="N", optional=True, help="Size of refined samples and bootstrap pools.")
	@LongFlag("--full-scale", dest="full_scale", help="Run the Lasso study at its full published scale.")
	@LongFlag("--emit-contour-histogram", dest="emit_contour_histogram", help="Write contour value histograms (softthresh-mean).")
	def HandleRun(self, args: Namespace) -> None:
		"""Handle program calls with command ``run``."""
		self._PrintHeadline()

		overrides: Dict[str, Any] = {key: getattr(args, dest) for dest, key in _VALUED_FLAGS.items()}
		overrides["full_scale"] = True if args.full_scale else None
		overrides["emit_contour_histogram"] = True if args.emit_contour_histogram else None
		outputDirectory = None if args.out is None else Path(args.out)

		try:
			config = ScenarioConfig.Resolve(args.Scenario, None if args.config is None else Path(args.config), overrides)
			outputDirectory = config.OutputDirectory
			self.WriteVerbose(f"  configuration digest: {config.Digest}")

			runner = RunScenario(config, self)
		except CalibratedBootstrapException as ex:
			self._Fail(ex, outputDirectory)
			return

		if self.Verbose:
			self.WriteVerbose("*" * self.Width)
			for report in runner.Reports:
				self.WriteVerbose(report.ToTree().Render(), appendLinebreak=False)
			self.WriteVerbose("*" * self.Width)

		self.WriteNormal(f"Results written to '{config.OutputDirectory}'.")
		self.ExitOnPreviousErrors()

	@CommandHandler("export-diabetes", help="Write the diabetes data as CSV.", description="Write scikit-learn's bundled diabetes data in the input CSV schema.")
	@LongValuedFlag("--out", dest="out", metaName="File", help="Output CSV file.")
	def HandleExportDiabetes(self, args: Namespace) -> None:
		"""Handle program calls with command ``export-diabetes``."""
		self._PrintHeadline()

		try:
			rows = ExportDiabetes(Path(args.out))
		except CalibratedBootstrapException as ex:
			self._Fail(ex, None)
			return

		self.WriteNormal(f"Wrote {rows} rows to '{args.out}'.")

	def _Fail(self, ex: CalibratedBootstrapException, outputDirectory: Nullable[Path]) -> None:
		self.WriteFatal(ex, immediateExit=False)
		for note in getattr(ex, "__notes__", []):
			self.WriteNormal(f"           {note}")

		if outputDirectory is not None:
			try:
				WriteError(outputDirectory / "error.json", ex)
			except OSError as osError:
				self.WriteWarning(f"Couldn't write error record: {osError}")

		self.Exit(EXIT_CONFIGURATION if isinstance(ex, HarnessException) else EXIT_NUMERIC)
