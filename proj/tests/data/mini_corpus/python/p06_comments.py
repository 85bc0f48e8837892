# setup constants for the run
def pick(options):
    # options has at least one entry
    chosen = options[0]
    return chosen
