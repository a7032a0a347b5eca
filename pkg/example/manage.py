#!/usr/bin/env python
"""Runs the ``isvd_*`` management commands without a Django project:

    python example/manage.py isvd_gen --mesh-n 16 --dt 0.01 --kind B --out b
    python example/manage.py isvd_run --algorithm isvd3 --input b --weight mass
"""
import os
import sys

# Set this directory's root on the path
sys.path.append(os.path.dirname(os.path.abspath(os.path.dirname(__file__))))

if __name__ == "__main__":
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "example.settings")

    from django.core.management import execute_from_command_line

    execute_from_command_line(sys.argv)
