import configlib

base = configlib.defaults()
override = configlib.from_env()
chosen = override or base
mode = "fast" if chosen else "slow"
settings = {"mode": mode, "retries": 3, "loader": chosen}
handle = settings["loader"]
resolved = handle.resolve()
print(resolved)
