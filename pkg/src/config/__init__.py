# dotenv-backed limits, defaults and logging settings
