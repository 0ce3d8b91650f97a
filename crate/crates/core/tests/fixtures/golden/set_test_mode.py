import numexpr

def set_test_mode(v: bool = True) -> None:
    """Keeps track of whether numexpr was used.Stores an additional `True' for every successful use of evaluate
    with numexpr since the last `get_test_result'. """
    global _TEST_MODE, _TEST_RESULT
    _TEST_MODE = v
    _TEST_RESULT = []
