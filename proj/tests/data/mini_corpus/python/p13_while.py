def halve(start):
    n = start
    moves = 0
    while n > 1:
        n = n // 2
        moves += 1
    return moves
