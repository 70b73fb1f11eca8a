from setuptools import setup, find_packages

setup(
    name="inhand-friction",
    version="1.0.0",
    packages=find_packages(where=".", include=['scripts*']),
    package_dir={"": "."},
    install_requires=[
        'numpy>=1.24.0',
        'pandas>=2.0.0',
        'pyyaml>=6.0',
        'python-dotenv>=0.19.0',
        'colorlog>=6.0.0',
    ],
    entry_points={
        'console_scripts': [
            'friction-est=scripts.cli:main',
        ],
    },
    python_requires='>=3.8',
)
