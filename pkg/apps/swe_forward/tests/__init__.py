# Empty init file to make tests/ a package.
# Django's test discovery will automatically find test_*.py files.
