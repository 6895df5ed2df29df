from hypothesis import settings

settings.register_profile("sclab", deadline=None, max_examples=60)
settings.load_profile("sclab")
