def coerce(raw):
    ratio = 0.5
    big = 1_000_000
    tiny = 1e-9
    flagged = raw > ratio
    return big, tiny, flagged
