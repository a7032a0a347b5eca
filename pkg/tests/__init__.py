import os

import django

# django setup must occur before importing the app modules
os.environ.setdefault("DJANGO_SETTINGS_MODULE", "tests.settings")
django.setup()
