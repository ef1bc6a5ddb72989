import os

# Set input language USA unicode encoding setting
# Necessary because click assumes ascii input unless otherwise specified
# https://click.palletsprojects.com/en/7.x/python3/
unicode_usa = "en_US.utf-8"
os.environ.setdefault("LC_LANG", unicode_usa)
os.environ.setdefault("LC_ALL", unicode_usa)

HOME = os.path.expanduser("~")
THREADS_ENV = "GDB_THREADS"


def sanitize_path(path):
    """Make sure path is absolute and user-expanded"""
    return os.path.abspath(os.path.expanduser(path))


def maybe_add_slash(path):
    """Add a final trailing slash if it wasn't there already"""
    with_trailing_slash = path if path.endswith("/") else path + "/"
    return with_trailing_slash


def maybe_make_parent_dir(path):
    """Create the folder that will hold ``path`` if it doesn't exist yet"""
    folder = os.path.dirname(sanitize_path(path))
    os.makedirs(folder, exist_ok=True)
    return folder


def get_max_threads(requested=None):
    """Number of worker threads, capped by the GDB_THREADS environment variable

    Parameters
    ----------
    requested : int or None
        Number of workers asked for by the caller. None means "as many as
        the machine has"

    Returns
    -------
    n_threads : int
        At least 1
    """
    n_threads = requested if requested is not None else (os.cpu_count() or 1)
    cap = os.environ.get(THREADS_ENV)
    if cap is not None:
        try:
            n_threads = min(n_threads, int(cap))
        except ValueError:
            raise ValueError(
                f"{THREADS_ENV} needs to be an integer, but {cap!r} was set"
            )
    return max(1, n_threads)
