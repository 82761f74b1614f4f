from setuptools import setup, find_packages

setup(
    name='milkfeverecon',
    version='0.1.0',
    description='Milk fever economic losses, producer surplus gains and incidence statistics',
    author='Agustin Damian Martinez',
    packages=find_packages(exclude=['tests', 'tests.*', 'examples', 'examples.*']),
    package_data={
        'milkfeverecon': ['data/*.params', 'data/*.csv', 'data/*.json'],
    },
    install_requires=[
        'numpy',
        'scipy',
        'sympy',
        'pandas>=1.5',
        'pydantic>=2',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'milkfever=milkfeverecon.cli:main',
        ],
    },
    python_requires='>=3.8',
)
