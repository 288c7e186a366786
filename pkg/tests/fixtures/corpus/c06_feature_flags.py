import featurelib

debug = 0

if debug > 2:
    def describe(batch):
        assert len(batch) < 100
        return featurelib.verbose(batch)
else:
    describe = lambda batch: featurelib.summary(batch)

batch = featurelib.sample(32)
report = describe(batch)
sink = featurelib.sink("out.txt")
sink.write(report)
