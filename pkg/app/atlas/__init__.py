# -*- coding: utf-8 -*-
"""
@Desc    : Simulator and analytic-verification toolkit for the Atlas model at critical density
"""

__version__ = "0.1.0"
