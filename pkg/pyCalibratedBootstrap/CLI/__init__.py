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
Command line program ``cb``.

.. rubric:: Usage

Run a scenario with a mandatory seed; results go to ``--out`` (default ``results``).

.. code-block::

   cb run mean-simple --seed 1
   cb run lr-joint --seed 7 --n 200 --kappa 0.3 --threads 4 --out results/lr-joint
   cb run softthresh-mean --seed 3 --emit-contour-histogram

The diabetes scenario reads a CSV file, which can be created from scikit-learn's bundled copy:

.. code-block::

   cb export-diabetes --out diabetes.csv
   cb run lasso-diabetes --seed 1 --data diabetes.csv
"""
from sys      import version_info
from typing   import NoReturn, Optional as Nullable

from argparse import RawDescriptionHelpFormatter, Namespace
from textwrap import dedent

from numpy                                    import __version__ as numpyVersion
from scipy                                    import __version__ as scipyVersion
from pyTooling.Common                         import __version__ as pyToolingVersion
from pyTooling.Decorators                     import export
from pyTooling.Attributes.ArgParse            import ArgParseHelperMixin, DefaultHandler, CommandHandler
from pyTooling.Attributes.ArgParse.Argument   import StringArgument
from pyTooling.TerminalUI                     import TerminalApplication

from pyCalibratedBootstrap                    import __version__, __copyright__, __license__, CalibratedBootstrapException
from pyCalibratedBootstrap.CLI.Scenario       import ScenarioHandlers, EXIT_NUMERIC


@export
class ProgramBase(TerminalApplication):
	"""Base-class for all program classes."""

	programTitle: str

	def _PrintHeadline(self) -> None:
		"""Print the programs headline including its version."""
		self.WriteNormal("=" * 120)
		self.WriteNormal(f"{self.programTitle + ' v' + __version__: ^120s}")
		self.WriteNormal("=" * 120)


@export
class Application(ProgramBase, ScenarioHandlers, ArgParseHelperMixin):
	"""Command line interface of ``cb``: scenario runs, data export, help and version pages."""

	programTitle = "Calibrated Bootstrap"

	def __init__(self) -> None:
		super().__init__()

		ArgParseHelperMixin.__init__(
			self,
			prog="cb",
			description=dedent("""\
				Runs calibrated m-out-of-n bootstrap scenarios and writes their reports, traces and coverage tables.
				Every run needs a seed; identical configurations reproduce identical results.
				"""),
			epilog=dedent("""\
				Scenarios:
				 * mean-simple, softthresh-mean (scalar means)
				 * lr-joint, lr-marginal (linear regression)
				 * lasso-sim, lasso-diabetes (Lasso)
				 * vonmises-dr (circular location)

				Exit codes: 0 success, 2 configuration or input data error, 3 numerical failure.
				"""),
			formatter_class=RawDescriptionHelpFormatter,
			add_help=False
		)

	def Run(self) -> None:
		ArgParseHelperMixin.Run(self)

	@DefaultHandler()
	def HandleDefault(self, _: Namespace) -> None:
		"""Handle program calls without any command."""
		self._PrintHeadline()
		self._PrintHelp()

	@CommandHandler("help", help="Display help page(s) for the given command name.", description="Display help page(s) for the given command name.")
	@StringArgument(dest="Command", metaName="Command", optional=True, help="Print help page(s) for a command.")
	def HandleHelp(self, args: Namespace) -> None:
		"""Handle program calls with command ``help``."""
		self._PrintHeadline()
		self._PrintHelp(args.Command)

	@CommandHandler("version", help="Display version information.", description="Display version information of cb and its numeric stack.")
	def HandleVersion(self, _: Namespace) -> None:
		"""Handle program calls with command ``version``."""
		self._PrintHeadline()
		self._PrintVersion()

	def _PrintVersion(self) -> None:
		self.WriteNormal(dedent(f"""\
			Copyright: {__copyright__}
			License:   {__license__}
			Version:   v{__version__}

			Python:    {version_info.major}.{version_info.minor}.{version_info.micro}
			numpy:     {numpyVersion}
			scipy:     {scipyVersion}
			pyTooling: {pyToolingVersion}
			"""))

	def _PrintHelp(self, command: Nullable[str] = None) -> None:
		if command is None or command == "help":
			self.MainParser.print_help()
			return

		try:
			self.SubParsers[command].print_help()
		except KeyError:
			self.WriteError(f"Command '{command}' is unknown. Known commands: {', '.join(sorted(self.SubParsers))}")


@export
def main() -> NoReturn:
	"""
	Entrypoint of the ``cb`` console script.

	Scenario failures are reported by the command handlers with exit code 2 or 3. A package exception escaping a handler
	is a numerical failure and ends the program with exit code 3.
	"""
	from sys import argv

	program = Application()
	program.Configure(
		verbose=("-v" in argv or "--verbose" in argv),
		debug=("-d" in argv or "--debug" in argv),
		quiet=("-q" in argv or "--quiet" in argv)
	)
	try:
		program.Run()
	except CalibratedBootstrapException as ex:
		program.WriteFatal(ex, immediateExit=False)
		exit(EXIT_NUMERIC)

	exit(0)


if __name__ == "__main__":
	main()
