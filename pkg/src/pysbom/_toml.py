try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

TOMLDecodeError = tomllib.TOMLDecodeError


def loads(content) -> dict:
    if isinstance(content, bytes):
        content = content.decode("utf-8")
    return tomllib.loads(content)
