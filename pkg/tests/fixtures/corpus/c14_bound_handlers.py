import scheduler


class Watcher:
    def __init__(self, tag):
        self.tag = tag

    def on_tick(self, moment):
        return self.tag

    def on_stop(self, reason):
        print(reason)


watcher = Watcher("jobs")
loop = scheduler.every(5)
loop.call(watcher.on_tick)
loop.finally_call(watcher.on_stop)
loop.run()
