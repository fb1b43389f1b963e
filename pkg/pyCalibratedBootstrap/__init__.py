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
Calibrated m-out-of-n bootstrap inference for parametric models.

The package searches, per significance level, the resample size ``m`` whose bootstrapped contour values undershoot the
level with exactly that probability (resampling approximation), then flattens the pooled contour values towards
uniformity (distributional resampling). The resulting samples yield finite-sample confidence regions and intervals.

.. rubric:: Subpackages

* :mod:`~pyCalibratedBootstrap.MathKit` - special functions, least squares, Lasso, random streams and samplers.
* :mod:`~pyCalibratedBootstrap.Models` - parametric model families (loss, fit, simulation).
* :mod:`~pyCalibratedBootstrap.Contour` - association function and contour values.
* :mod:`~pyCalibratedBootstrap.Calibrate` - resampling approximation.
* :mod:`~pyCalibratedBootstrap.Refine` - distributional resampling.
* :mod:`~pyCalibratedBootstrap.Inference` - regions, intervals, baseline bootstraps and fiducial oracles.
* :mod:`~pyCalibratedBootstrap.Harness` - scenarios, data ingestion, configuration and report files.
* :mod:`~pyCalibratedBootstrap.CLI` - the ``cb`` command line program.
"""
__author__ =    "pyCalibratedBootstrap contributors"
__email__ =     "maintainers@pycalibratedbootstrap.invalid"
__copyright__ = "2024-2026, pyCalibratedBootstrap contributors"
__license__ =   "Apache License, Version 2.0"
__version__ =   "0.4.1"
__keywords__ =  ["bootstrap", "m-out-of-n bootstrap", "confidence distribution", "stochastic approximation", "Lasso", "von Mises"]

from sys                  import version_info
from typing               import List

from pyTooling.Decorators import export


@export
class CalibratedBootstrapException(Exception):
	"""Base-class for all exceptions raised by this package."""

	# WORKAROUND: for Python <3.11
	# Implementing a dummy method for Python versions before
	if version_info < (3, 11):  # pragma: no cover
		__notes__: List[str]

		def add_note(self, message: str) -> None:
			try:
				self.__notes__.append(message)
			except AttributeError:
				self.__notes__ = [message]
