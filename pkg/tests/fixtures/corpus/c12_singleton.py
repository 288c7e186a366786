class Pool:
    def __new__(cls):
        return shared_pool


def acquire():
    pool = Pool()
    return pool


shared_handle = acquire()
