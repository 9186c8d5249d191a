# fundamental_ratio/__init__.py
# Copyright (C) 2024 the fundamental-ratio authors and contributors
#
# This module is released under the MIT License: http://www.opensource.org/licenses/mit-license.php
__version__ = "1.0"
