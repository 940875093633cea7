# Present so pytest puts this directory on sys.path, letting test modules
# import the shared helpers (helpers.py, proof_helpers.py) directly.
