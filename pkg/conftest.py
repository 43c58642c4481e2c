import importlib.util

# the retrieval corpus contains *_test.py files that are not ours to run
collect_ignore_glob = ["examples/*", "scripts/*"]

if importlib.util.find_spec("fbgru") is None:
    collect_ignore_glob.append("fbgru/*")
