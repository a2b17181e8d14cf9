# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled identifier scanner.

Single left-to-right pass over the UTF-8 bytes; must stay observably
identical to _scan_py.scan (the pure backend is the reference and the test
suite checks equivalence on random inputs).
"""

CHANGE_ID = 0
HEX_RUN = 1


cdef inline bint _is_hex(unsigned char c) noexcept:
    return (48 <= c <= 57) or (97 <= c <= 102) or (65 <= c <= 70)


cdef inline bint _is_word(unsigned char c) noexcept:
    return (48 <= c <= 57) or (97 <= c <= 122) or (65 <= c <= 90) or c == 95


def scan(bytes data):
    """Return (kind, start, end) candidates ordered by position."""
    cdef const unsigned char* buf = data
    cdef Py_ssize_t size = len(data)
    cdef Py_ssize_t i = 0
    cdef Py_ssize_t j
    cdef Py_ssize_t run_len
    cdef bint ok
    cdef list out = []
    while i < size:
        # 'I' heading a Change-Id candidate, token-bounded on the left.
        if buf[i] == 73 and (i == 0 or not _is_word(buf[i - 1])) and i + 41 <= size:
            ok = True
            for j in range(i + 1, i + 41):
                if not _is_hex(buf[j]):
                    ok = False
                    break
            if ok and (i + 41 == size or not _is_word(buf[i + 41])):
                out.append((CHANGE_ID, i, i + 41))
                i += 41
                continue
        if _is_hex(buf[i]):
            j = i
            while j < size and _is_hex(buf[j]):
                j += 1
            run_len = j - i
            if (
                (i == 0 or not _is_word(buf[i - 1]))
                and 7 <= run_len <= 40
                and (j == size or not _is_word(buf[j]))
            ):
                out.append((HEX_RUN, i, j))
            i = j
            continue
        i += 1
    return out
